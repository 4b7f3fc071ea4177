"""Command-line front end: enumerate, solvability, taskgen, synthesize, export-dot.

Exit codes: 0 success, 2 input error, 3 negative verdict, 4 solver budget
exhausted. ``HANDSYNTH_THREADS`` sets the default of ``--threads``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import formats
from .enumeration import EnumerationQuery, topology_search
from .fk import UnsolvableTaskError, build_fk, generate_task
from .formats import FormatError
from .solvability import is_solvable
from .synthesis import SolverConfig, solve, verify
from .topology import NotationError, TopologyError, TreeTopology, parse_notation, to_dot

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE, EXIT_BUDGET = 0, 2, 3, 4


class InputError(Exception):
    pass


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HANDSYNTH_THREADS", "1")))
    except ValueError:
        return 1


def _edge_range(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"edges must be N or LO..HI, got {text!r}") from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _topology(args, max_joints: int | None = 5) -> TreeTopology:
    if args.topology is None and getattr(args, "parents", None) is None:
        raise InputError("a topology is required (--topology or --parents/--joints)")
    if getattr(args, "parents", None) is not None:
        if args.joints is None:
            raise InputError("--parents needs --joints")
        try:
            parents = [int(v) for v in args.parents.split(",")]
            joints = [int(v) for v in args.joints.split(",")]
        except ValueError:
            raise InputError("--parents/--joints take comma-separated integers") from None
        return TreeTopology(tuple(parents), tuple(joints))
    return parse_notation(args.topology, max_joints=max_joints)


def _emit(data: dict, out: str | None):
    text = formats.dump(data, out)
    if out is None:
        sys.stdout.write(text)


# --- commands ---------------------------------------------------------------

def cmd_enumerate(args) -> int:
    lo, hi = args.edges
    if lo > hi:
        raise InputError(f"edge range {lo}..{hi} is empty")
    atlases = []
    for e in range(lo, hi + 1):
        try:
            q = EnumerationQuery(args.positions, args.branches, e)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        atlases.append(topology_search(q, workers=args.threads))
    feasible = [a for a in atlases if not a.diagnostic]
    for a in atlases:
        if a.diagnostic:
            print(f"e={a.query.e}: {a.diagnostic}", file=sys.stderr)
    if not feasible:
        return EXIT_INPUT
    inputs = {"positions": args.positions, "branches": args.branches, "edges": [lo, hi]}
    data = {
        "manifest": formats.manifest("enumerate", inputs, outputs=[args.out] if args.out else []),
        "total_candidates": sum(len(a.candidates) for a in atlases),
        "atlases": [formats.atlas_record(a) for a in atlases],
    }
    if args.out:
        formats.dump(data, args.out)
        sys.stdout.write(formats.atlas_table(atlases))
    else:
        _emit(data, None)
    return EXIT_OK


def cmd_solvability(args) -> int:
    # joint counts above five are accepted here so long chains get a verdict
    t = _topology(args, max_joints=None)
    report = is_solvable(t)
    inputs = {"topology": args.topology, "parents": list(t.parents), "joints": list(t.joints)}
    data = {
        "manifest": formats.manifest("solvability", inputs, outputs=[args.out] if args.out else []),
        **formats.report_record(report),
    }
    _emit(data, args.out)
    if args.out:
        print(report.summary())
    return EXIT_OK if report.solvable else EXIT_NEGATIVE


def cmd_taskgen(args) -> int:
    t = _topology(args)
    try:
        task, cfg = generate_task(t, args.positions, args.twist, args.accel, seed=args.seed)
    except UnsolvableTaskError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    outputs = [p for p in (args.out, args.ground_truth) if p]
    inputs = {
        "topology": args.topology,
        "positions": args.positions,
        "twist_positions": list(args.twist),
        "acceleration_positions": list(args.accel),
    }
    data = {"manifest": formats.manifest("taskgen", inputs, args.seed, outputs), **formats.task_record(task, t)}
    _emit(data, args.out)
    if args.ground_truth:
        truth = {
            "manifest": formats.manifest("taskgen", inputs, args.seed, outputs),
            "topology": args.topology,
            **formats.configuration_record(cfg),
        }
        formats.dump(truth, args.ground_truth)
    return EXIT_OK


def _load_config(source: str | None, seed: int) -> SolverConfig:
    overrides: dict = {}
    if source:
        if Path(source).is_file():
            overrides = formats.load(source)
        else:
            for item in source.split(","):
                key, sep, value = item.partition("=")
                if not sep:
                    raise InputError(f"config override {item!r} is not key=value")
                try:
                    overrides[key.strip()] = json.loads(value)
                except json.JSONDecodeError:
                    raise InputError(f"config value {value!r} is not a number") from None
    try:
        return SolverConfig(seed=seed).replace(**overrides)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from None


def _run_one(job):
    task, t, config, run = job
    result = solve(task, t, config)
    return run, result, verify(result, task)


def cmd_synthesize(args) -> int:
    if args.runs < 1:
        raise InputError("--runs must be at least 1")
    t = _topology(args)
    task = formats.task_from_record(formats.load(args.task))
    prog = build_fk(t)
    if task.n_branches != prog.n_branches:
        raise InputError(f"task has {task.n_branches} branches, topology {args.topology} has {prog.n_branches}")
    report = is_solvable(t)
    if not report.solvable or task.m > report.M:
        print(f"{args.topology}: {report.summary()}; task has {task.m} items", file=sys.stderr)
        return EXIT_NEGATIVE
    base = _load_config(args.config, args.seed)
    jobs = [(task, t, base.replace(seed=args.seed + r), r + 1) for r in range(args.runs)]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            outcomes = list(pool.map(_run_one, jobs))
    else:
        outcomes = [_run_one(j) for j in jobs]
    records = [formats.result_record(run, r, v) for run, r, v in outcomes]
    inputs = {"topology": args.topology, "task": args.task, "runs": args.runs, "config": vars(base)}
    data = {
        "manifest": formats.manifest("synthesize", inputs, args.seed, [args.out] if args.out else []),
        "runs": records,
    }
    _emit(data, args.out)
    if args.out:
        print(f"{'run':>4} {'finalError':>12} {'iterations':>10} {'wallTime':>9} {'verify':>10}")
        for run, r, v in outcomes:
            print(f"{run:>4} {r.final_error:>12.3e} {r.iterations:>10} {r.wall_time:>9.2f} {v:>10.2e}")
    return EXIT_OK if any(r.converged for _, r, _ in outcomes) else EXIT_BUDGET


def cmd_export_dot(args) -> int:
    t = _topology(args)
    text = to_dot(t)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="handsynth", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def topology_flags(sp, arrays=False):
        sp.add_argument("-t", "--topology", help="topology string, e.g. '2-(1-(2,2),2)'")
        if arrays:
            sp.add_argument("--parents", help="comma-separated parent-pointer array")
            sp.add_argument("--joints", help="comma-separated joint array")

    sp = sub.add_parser("enumerate", help="type synthesis: list candidate topologies")
    sp.add_argument("-m", "--positions", type=_positive, required=True)
    sp.add_argument("-b", "--branches", type=_positive, required=True)
    sp.add_argument("-e", "--edges", type=_edge_range, required=True, help="N or LO..HI")
    sp.add_argument("--threads", type=_positive, default=_default_threads())
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("solvability", help="structural synthesis: solvability verdict")
    topology_flags(sp, arrays=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_solvability)

    sp = sub.add_parser("taskgen", help="sample a task with a known exact solution")
    topology_flags(sp)
    sp.add_argument("-m", "--positions", type=_positive, required=True)
    sp.add_argument("--twist", type=_positive, action="append", default=[], help="position with a twist (repeatable)")
    sp.add_argument("--accel", type=_positive, action="append", default=[], help="position with an acceleration")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.add_argument("--ground-truth", help="also write the generating hand to this file")
    sp.set_defaults(func=cmd_taskgen)

    sp = sub.add_parser("synthesize", help="dimensional synthesis")
    topology_flags(sp)
    sp.add_argument("--task", required=True)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--config", help="JSON file or key=value,... solver overrides")
    sp.add_argument("--threads", type=_positive, default=_default_threads())
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_synthesize)

    sp = sub.add_parser("export-dot", help="render a topology as a DOT digraph")
    topology_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_dot)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NotationError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (InputError, TopologyError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Structured-text file formats (JSON) for atlases, reports, tasks and results.

Every file carries a ``manifest`` block. The timestamp honours
``SOURCE_DATE_EPOCH`` so that runs can be made byte-identical.
"""
from __future__ import annotations

import json
import os
import time
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .enumeration import Atlas
from .fk import AccelerationSlot, HandConfiguration, Task, VelocitySlot
from .screws import dq_from_rt, dq_to_rt
from .solvability import SolvabilityReport, format_rational
from .synthesis import SynthesisResult
from .topology import TreeTopology, format_notation


class FormatError(ValueError):
    pass


def manifest(command: str, inputs: dict, seed: int | None = None, outputs: list[str] | None = None) -> dict:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    stamp = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return {
        "command": command,
        "inputs": inputs,
        "seed": seed,
        "tool_version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", stamp),
        "outputs": outputs or [],
    }


def dump(data: dict, path: str | Path | None) -> str:
    text = json.dumps(data, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


# --- atlas ----------------------------------------------------------------

def atlas_record(atlas: Atlas) -> dict:
    q = atlas.query
    J = atlas.total_joints
    return {
        "m": q.m,
        "b": q.b,
        "e": q.e,
        "J": format_rational(J),
        "joint_arrays": atlas.joint_array_count,
        "parent_arrays": atlas.parent_array_count,
        "candidates": len(atlas.candidates),
        "isomorphism_classes": len(atlas.isomorphism_classes),
        "diagnostic": atlas.diagnostic,
        "topologies": [
            {
                "notation": format_notation(t),
                "parents": list(t.parents),
                "joints": list(t.joints),
                "m": q.m,
                "b": q.b,
                "e": q.e,
                "J": t.total_joints,
            }
            for t in atlas.candidates
        ],
    }


def atlas_table(atlases: list[Atlas]) -> str:
    lines = [f"{'m':>3} {'b':>3} {'e':>3} {'Joints':>7} {'j':>6} {'p':>4} {'Candidates':>11} {'Classes':>8}"]
    for a in atlases:
        q = a.query
        lines.append(
            f"{q.m:>3} {q.b:>3} {q.e:>3} {format_rational(a.total_joints):>7} {a.joint_array_count:>6} "
            f"{a.parent_array_count:>4} {len(a.candidates):>11} {len(a.isomorphism_classes):>8}"
        )
    for a in atlases:
        if not a.candidates:
            continue
        lines.append("")
        lines.append(f"e = {a.query.e}:")
        for t in a.candidates:
            lines.append(f"  p={list(t.parents)}  j={list(t.joints)}  {format_notation(t)}")
    return "\n".join(lines) + "\n"


# --- solvability ----------------------------------------------------------

def report_record(r: SolvabilityReport) -> dict:
    return {
        "topology": format_notation(r.topology),
        "parents": list(r.topology.parents),
        "joints": list(r.topology.joints),
        "verdict": "solvable" if r.solvable else "not solvable",
        "M": format_rational(r.M),
        "exact_positions": r.exact_positions,
        "unconstrained": r.unconstrained,
        "subgraphs_checked": r.checked,
        "summary": r.summary(),
        "violations": [
            {
                "notation": v.notation,
                "root": v.subgraph.root,
                "branches": list(v.subgraph.branches),
                "m": format_rational(v.m),
            }
            for v in r.violations
        ],
    }


# --- tasks ----------------------------------------------------------------

def task_record(task: Task, t: TreeTopology | None = None) -> dict:
    positions = []
    for i in range(task.n_branches):
        row = []
        for k in range(task.n_positions):
            r, tr = dq_to_rt(task.positions[i, k])
            row.append({"rotation": _floats(r), "translation": _floats(tr)})
        positions.append(row)
    twists = [
        {"branch": i + 1, "position": v.position, "values": _floats(v.twists[i])}
        for v in task.velocities
        for i in range(task.n_branches)
    ]
    accels = [
        {"branch": i + 1, "position": a.position, "values": _floats(a.accelerations[i])}
        for a in task.accelerations
        for i in range(task.n_branches)
    ]
    out = {
        "branches": task.n_branches,
        "positions_per_branch": task.n_positions,
        "positions": positions,
        "twists": twists,
        "accelerations": accels,
    }
    if t is not None:
        out = {"topology": format_notation(t), **out}
    return out


def _group_slots(records: list[dict], b: int, kind: str) -> list[tuple[int, np.ndarray]]:
    per_branch: dict[int, list[dict]] = {i: [] for i in range(1, b + 1)}
    for rec in records:
        i = int(rec["branch"])
        if i not in per_branch:
            raise FormatError(f"{kind} record for branch {i}, task has {b} branches")
        if len(rec["values"]) != 6:
            raise FormatError(f"{kind} record needs 6 numbers")
        per_branch[i].append(rec)
    counts = {len(v) for v in per_branch.values()}
    if len(counts) > 1:
        raise FormatError(f"every branch needs the same number of {kind} records")
    slots = []
    for s in range(counts.pop() if counts else 0):
        recs = [per_branch[i][s] for i in range(1, b + 1)]
        pos = {int(r["position"]) for r in recs}
        if len(pos) != 1:
            raise FormatError(f"{kind} record {s + 1} is at different positions across branches")
        slots.append((pos.pop(), np.array([r["values"] for r in recs], dtype=float)))
    return slots


def task_from_record(data: dict) -> Task:
    try:
        rows = data["positions"]
        poses = np.array(
            [[dq_from_rt(np.asarray(p["rotation"], float), np.asarray(p["translation"], float)) for p in row] for row in rows]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed positions: {exc}") from exc
    if poses.ndim != 3:
        raise FormatError("every branch needs the same number of positions")
    # normalise rotations given with limited precision
    n = np.linalg.norm(poses[..., :4], axis=-1, keepdims=True)
    poses = poses / n
    b = poses.shape[0]
    declared = (data.get("branches", b), data.get("positions_per_branch", poses.shape[1]))
    if declared != poses.shape[:2]:
        raise FormatError(f"header declares {declared[0]}x{declared[1]} poses, file holds {b}x{poses.shape[1]}")
    task = Task(poses)
    for pos, tw in _group_slots(data.get("twists", []), b, "twist"):
        task.velocities.append(VelocitySlot(pos, tw))
    for pos, acc in _group_slots(data.get("accelerations", []), b, "acceleration"):
        vs = next((s for s, v in enumerate(task.velocities) if v.position == pos), None)
        if vs is None:
            raise FormatError(f"acceleration at position {pos} has no twist at that position")
        task.accelerations.append(AccelerationSlot(pos, vs, acc))
    try:
        task.validate()
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return task


def configuration_record(cfg: HandConfiguration) -> dict:
    return {
        "axes": _floats(cfg.axes),
        "joint_angles": _floats(cfg.angles),
        "joint_rates": _floats(cfg.rates),
        "joint_accelerations": _floats(cfg.accels),
    }


def configuration_from_record(data: dict) -> HandConfiguration:
    return HandConfiguration(
        np.array(data["axes"], dtype=float),
        np.array(data["joint_angles"], dtype=float),
        np.array(data.get("joint_rates", []), dtype=float).reshape(-1, len(data["axes"])),
        np.array(data.get("joint_accelerations", []), dtype=float).reshape(-1, len(data["axes"])),
    )


def result_record(run: int, r: SynthesisResult, verification: float | None = None) -> dict[str, Any]:
    rec = {
        "run": run,
        "topology": format_notation(r.topology),
        "seed": r.seed,
        "final_error": r.final_error,
        "iterations": r.iterations,
        "wall_time": round(r.wall_time, 3),
        "converged": r.converged,
    }
    if verification is not None:
        rec["verification"] = verification
    rec.update(configuration_record(r.configuration))
    return rec

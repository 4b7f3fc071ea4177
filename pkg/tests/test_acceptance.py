"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` to see the summary lines.
"""
import statistics
import time

import numpy as np
import pytest

from handsynth.enumeration import EnumerationQuery, brute_force_candidates, search_range, topology_search
from handsynth.fk import build_fk, branch_acceleration, branch_twist, generate_task, random_configuration
from handsynth.residuals import ResidualSystem, numerical_jacobian
from handsynth.screws import axis_exp, dq_from_rt, dq_mul, dq_transform_points, line_through, transform_line
from handsynth.solvability import contact_mobility, is_solvable
from handsynth.synthesis import SolverConfig, build_residuals, solve, verify
from handsynth.topology import TreeTopology, parse_notation, remove_common_edges, reroot
from oracles import about_line, apply, chain_matrix, hom, rodrigues, spatial_twist
from reference_data import (
    DESIGN_COUNTS,
    DESIGN_TOPOLOGY,
    FIVE_POSITION_ATLAS,
    FIVE_POSITION_TOTALS,
    REROOT_TRACE,
    SOLVABILITY_EXAMPLES,
    TWO_PALM_ARRAYS,
    TYPE_SYNTHESIS_ROWS,
)


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else ""))
        return ok

    return emit


def test_type_synthesis_rows(report):
    start = time.perf_counter()
    mismatches = []
    for q, want in TYPE_SYNTHESIS_ROWS.items():
        a = topology_search(EnumerationQuery(*q))
        got = (a.total_joints, a.joint_array_count, a.parent_array_count, len(a.candidates))
        if got != want:
            mismatches.append((q, got, want))
    elapsed = time.perf_counter() - start
    ok = not mismatches and elapsed < 60
    report(1, "27 type-synthesis rows: joints, j, p and candidate counts", ok,
           f"{len(TYPE_SYNTHESIS_ROWS) - len(mismatches)}/27 rows exact, {elapsed:.1f} s")
    assert not mismatches
    assert elapsed < 60


def test_five_position_listing(report):
    bad = []
    for (b, e), listing in FIVE_POSITION_ATLAS.items():
        a = topology_search(EnumerationQuery(5, b, e))
        got = {(t.parents, t.joints) for t in a.candidates}
        want = {(p, j) for p, js in listing.items() for j in js}
        if got != want:
            bad.append((b, e))
    sizes = {be: sum(map(len, listing.values())) for be, listing in FIVE_POSITION_ATLAS.items()}
    ok = not bad and sizes[(3, 5)] == 19 and sizes[(4, 5)] == 14
    report(2, "five-position joint arrays match as sets", ok, f"{len(FIVE_POSITION_ATLAS)} listings, mismatches {bad}")
    assert ok


def test_five_position_totals(report):
    got = {b: sum(len(a.candidates) for a in search_range(5, b, lo, hi)) for b, (lo, hi, _) in FIVE_POSITION_TOTALS.items()}
    want = {b: total for b, (_, _, total) in FIVE_POSITION_TOTALS.items()}
    report(3, "five-position atlas totals", got == want, f"{got}")
    assert got == want


def test_solvability_verdicts(report):
    verdicts = []
    for text, solvable, M in SOLVABILITY_EXAMPLES:
        r = is_solvable(parse_notation(text, max_joints=None))
        if solvable:
            verdicts.append(r.solvable and r.exact_positions == M and not r.violations)
        else:
            verdicts.append(not r.solvable and any(v.notation == "R-(R)" for v in r.violations))
    ok = all(verdicts)
    report(4, "solvability verdicts for the four example hands", ok, f"{verdicts}")
    assert ok


def test_reroot_trace(report):
    trace = []
    first = remove_common_edges(TreeTopology(*TWO_PALM_ARRAYS))
    last = reroot(first, 6, trace)
    got = [first.parents, *trace, last.parents]
    ok = got == REROOT_TRACE
    report(5, "re-rooting trace of the two-palm hand", ok)
    assert ok


def test_design_example_counts(report):
    task, _ = generate_task(parse_notation(DESIGN_TOPOLOGY), 5)
    L = build_residuals(task, build_fk(parse_notation(DESIGN_TOPOLOGY))).layout
    got = {"equations": L.n_equation_residuals, "unknowns": L.n_unknowns, "independent": L.n_independent}
    report(6, "equation and unknown counts for the design example", got == DESIGN_COUNTS, f"{got}")
    assert got == DESIGN_COUNTS


def test_dimensional_synthesis_round_trip(report):
    t = parse_notation(DESIGN_TOPOLOGY)
    ok_runs, walls, worst = 0, [], 0.0
    for seed in range(10):
        task, _ = generate_task(t, 5, seed=seed)
        r = solve(task, t, SolverConfig(seed=seed))
        v = verify(r, task)
        walls.append(r.wall_time)
        if r.converged and r.final_error <= 1e-10 and v <= 1e-8:
            ok_runs += 1
            worst = max(worst, v)
    median = statistics.median(walls)
    ok = ok_runs >= 9 and median <= 60
    report(7, "dimensional synthesis on 10 seeded tasks", ok,
           f"{ok_runs}/10 converged, median {median:.2f} s, worst verify {worst:.1e}")
    assert ok_runs >= 9
    assert median <= 60


def _kernel_errors(rng, samples=200):
    pts = rng.uniform(-1, 1, size=(5, 3))
    exp_err = prod_err = line_err = 0.0
    for _ in range(samples):
        c, d = rng.uniform(-1, 1, 3), rng.normal(size=3)
        theta = rng.uniform(-np.pi, np.pi)
        exp_err = max(exp_err, np.abs(dq_transform_points(axis_exp(line_through(c, d), theta), pts)
                                      - apply(about_line(c, d, theta), pts)).max())
        pair = []
        for _ in range(2):
            u = rng.normal(size=3)
            u /= np.linalg.norm(u)
            phi, tr = rng.uniform(-np.pi, np.pi), rng.uniform(-2, 2, 3)
            q = np.concatenate([[np.cos(phi / 2)], np.sin(phi / 2) * u])
            pair.append((dq_from_rt(q, tr), hom(rodrigues(u, phi), tr)))
        (a, Ta), (b, Tb) = pair
        prod_err = max(prod_err, np.abs(dq_transform_points(dq_mul(a, b), pts) - apply(Ta @ Tb, pts)).max())
        p, q2 = apply(Ta, np.array([c, c + d]))
        line_err = max(line_err, np.abs(transform_line(line_through(c, d), a) - line_through(p, q2 - p)).max())
    return exp_err, prod_err, line_err


def _derivative_errors(rng, samples=20):
    prog = build_fk(parse_notation(DESIGN_TOPOLOGY))
    tw_err = acc_err = 0.0
    for _ in range(samples):
        cfg = random_configuration(prog.n_joints, 3, rng)
        cfg.rates = rng.normal(size=(1, prog.n_joints))
        cfg.accels = rng.normal(size=(1, prog.n_joints))

        def traj(b, s):
            th = cfg.angles[b, 2] + cfg.rates[0, b] * s + 0.5 * cfg.accels[0, b] * s * s
            return chain_matrix(cfg.axes[b], th)

        for i, b in enumerate(prog.branch_joints):
            h = 1e-6
            T0 = traj(b, 0.0)
            fd = spatial_twist((traj(b, h) - traj(b, -h)) / (2 * h), T0)
            tw_err = max(tw_err, np.abs(branch_twist(cfg, prog, i, 3) - fd).max())
            h = 1e-4
            Tm, Tp = traj(b, -h), traj(b, h)
            Td, Tdd = (Tp - Tm) / (2 * h), (Tp - 2 * T0 + Tm) / (h * h)
            Ti = np.linalg.inv(T0)
            fd = spatial_twist(Tdd - Td @ Ti @ Td, T0)
            acc_err = max(acc_err, np.abs(branch_acceleration(cfg, prog, i, 3) - fd).max())
    return tw_err, acc_err


def _jacobian_error(rng, samples=20):
    t = parse_notation("2-(2,2)")
    task, _ = generate_task(t, 3, [2], [2], seed=0)
    system = ResidualSystem(task, build_fk(t))
    worst = 0.0
    for x in system.random_population(samples, rng):
        N = numerical_jacobian(system, x, 1e-6)
        worst = max(worst, np.abs(system.jacobian(x) - N).max() / max(1.0, np.abs(N).max()))
    return worst


def test_numerical_kernel_properties(report):
    rng = np.random.default_rng(2024)
    exp_err, prod_err, line_err = _kernel_errors(rng)
    tw_err, acc_err = _derivative_errors(rng)
    jac_err = _jacobian_error(rng)
    ok = max(exp_err, prod_err, line_err) <= 1e-10 and tw_err <= 1e-5 and acc_err <= 1e-4 and jac_err <= 1e-4
    report(8, "numerical kernel against matrix and finite-difference oracles", ok,
           f"exp {exp_err:.1e}, product {prod_err:.1e}, transform {line_err:.1e}, "
           f"twist {tw_err:.1e}, accel {acc_err:.1e}, jacobian {jac_err:.1e}")
    assert max(exp_err, prod_err, line_err) <= 1e-10
    assert tw_err <= 1e-5 and acc_err <= 1e-4 and jac_err <= 1e-4


def test_brute_force_equivalence(report):
    rows = [q for q in TYPE_SYNTHESIS_ROWS if q[2] <= 4]
    bad = [q for q in rows if brute_force_candidates(*q) != set(topology_search(EnumerationQuery(*q)).isomorphism_classes)]
    report(9, "brute force equals the rule-based search for rows with e <= 4", not bad,
           f"{len(rows) - len(bad)}/{len(rows)} rows")
    assert not bad


def test_contact_mobility(report):
    # two soft-finger contacts on the 2-(2,2) hand: 8 bodies, six revolute joints and two 2-freedom contacts
    got = contact_mobility(8, [1] * 6 + [2, 2])
    report(10, "grasp mobility of the two-finger hand", got == 4, f"mobility {got}")
    assert got == 4

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from handsynth.enumeration import required_joints
from handsynth.solvability import (
    INF,
    SolvabilityVectors,
    StructureTable,
    chain_positions,
    contact_mobility,
    format_rational,
    is_solvable,
    positions,
)
from handsynth.topology import TreeTopology, parse_notation
from reference_data import MISLABELLED_ARRAYS, SOLVABILITY_EXAMPLES
from strategies import topologies


def full_tree_positions(text):
    t = parse_notation(text)
    return positions(SolvabilityVectors.for_subgraph(t, set(t.live_edges()), t.end_effectors()))


def test_positions_examples():
    assert full_tree_positions("2R-(3R,R-(2R,2R,2R),3R)") == 5
    assert full_tree_positions("3R-(2R,R-(3R,3R,3R,3R))") == 7
    assert chain_positions(2) == 3
    assert chain_positions(6) == INF
    assert chain_positions(7) == INF


@pytest.mark.parametrize("text, solvable, M", SOLVABILITY_EXAMPLES)
def test_solvability_examples(text, solvable, M):
    r = is_solvable(parse_notation(text))
    assert r.solvable is solvable
    if solvable:
        assert r.M == M and not r.violations
    else:
        assert any(v.notation == "R-(R)" and v.m == 3 and v.m < r.M for v in r.violations)


def test_mislabelled_arrays_do_not_give_seven():
    t = TreeTopology(*MISLABELLED_ARRAYS)
    assert is_solvable(t).M == Fraction(17, 5)


def test_wristless_three_finger_hand():
    r = is_solvable(parse_notation("0-(3,3,3)"))
    assert r.solvable and r.M == 5 and r.exact_positions == 5
    assert r.checked == 2 * (2**3 - 1) - 3


def test_unconstrained_chain():
    r = is_solvable(parse_notation("6", max_joints=None))
    assert not r.solvable and r.unconstrained and r.M == INF
    assert "no constraint" in r.summary()


def test_too_few_positions():
    r = is_solvable(parse_notation("1"))
    assert r.M == Fraction(9, 5) and not r.solvable


def test_constraints_reduce_positions():
    t = parse_notation("0-(3,3,3)")
    r = is_solvable(t, {1: 3, 2: 3, 3: 3})
    assert r.M == Fraction(36 - 9, 9) + 1


@pytest.mark.parametrize("n, freedoms, mobility", [(8, [1] * 6 + [2, 2], 4), (2, [1], 1), (3, [1, 1], 2)])
def test_contact_mobility(n, freedoms, mobility):
    assert contact_mobility(n, freedoms) == mobility


def test_format_rational():
    assert format_rational(Fraction(17, 5)) == "17/5"
    assert format_rational(Fraction(5)) == "5"
    assert format_rational(INF) == "inf"


@given(topologies)
def test_structure_table_agrees_with_report(t):
    assert StructureTable(t.parents).solvable(t.joints) == is_solvable(t).solvable


@given(topologies)
def test_report_invariants(t):
    r = is_solvable(t)
    if r.solvable:
        assert not r.violations and r.M != INF and r.M >= 2
    for v in r.violations:
        assert v.m < r.M


@given(st.integers(2, 30), st.integers(1, 6))
def test_positions_inverts_joint_formula(m, b):
    J = required_joints(m, b)
    if J.denominator == 1:
        assert chain_positions(int(J), b) == m


@given(topologies)
def test_two_fingertip_reroot_symmetry(t):
    ees = t.end_effectors()
    if len(ees) != 2:
        return
    from handsynth.topology import Subgraph, subgraph_edges

    m = []
    for r, other in ((ees[0], ees[1]), (ees[1], ees[0])):
        tree, edges = subgraph_edges(t, Subgraph(r, (other,)))
        m.append(positions(SolvabilityVectors.for_subgraph(tree, edges, (other,))))
    assert m[0] == m[1]


@given(topologies, st.data())
def test_more_joints_never_fewer_positions(t, data):
    i = data.draw(st.sampled_from(t.live_edges()))
    if t.joints[i - 1] == 5:
        return
    j = list(t.joints)
    j[i - 1] += 1
    before = is_solvable(t).M
    after = is_solvable(TreeTopology(t.parents, tuple(j))).M
    assert after >= before

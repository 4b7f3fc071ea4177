"""Counting-based solvability of tree topologies for exact synthesis.

All position counts are exact ``Fraction`` values; a subgraph whose
denominator is not positive puts no limit on the task and is reported as
``INF``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .topology import Subgraph, TreeTopology, iter_subtrees, subgraph_notation

INF = math.inf

# per revolute joint: 4 structural variables, 1 joint variable per position
STRUCTURAL_PER_JOINT = 4
JOINT_VARS_PER_JOINT = 1
SPATIAL_FREEDOM = 6


@dataclass
class SolvabilityVectors:
    structural_per_edge: Sequence[int]
    joint_vars_per_edge: Sequence[int]
    ee_freedom_per_branch: Sequence[int]
    extra_constraints_per_branch: Sequence[int]
    edge_selector: Sequence[int]
    branch_selector: Sequence[int]

    @classmethod
    def for_subgraph(
        cls,
        t: TreeTopology,
        edges,
        branches,
        constraints: dict[int, int] | None = None,
    ) -> SolvabilityVectors:
        ids = range(1, t.n_edges + 1)
        live = set(t.live_edges())
        ees = sorted(set(t.end_effectors()) | set(branches))
        return cls(
            structural_per_edge=[STRUCTURAL_PER_JOINT * t.joints[i - 1] if i in live else 0 for i in ids],
            joint_vars_per_edge=[JOINT_VARS_PER_JOINT * t.joints[i - 1] if i in live else 0 for i in ids],
            ee_freedom_per_branch=[SPATIAL_FREEDOM] * len(ees),
            extra_constraints_per_branch=[(constraints or {}).get(b, 0) for b in ees],
            edge_selector=[int(i in edges) for i in ids],
            branch_selector=[int(b in branches) for b in ees],
        )


def _dot(a, b) -> int:
    return sum(x * y for x, y in zip(a, b))


def positions(v: SolvabilityVectors) -> Fraction | float:
    """Precision positions admitted by a subgraph, ``INF`` if unconstrained."""
    num = _dot(v.structural_per_edge, v.edge_selector) - _dot(v.extra_constraints_per_branch, v.branch_selector)
    den = _dot(v.ee_freedom_per_branch, v.branch_selector) - _dot(v.joint_vars_per_edge, v.edge_selector)
    if den <= 0:
        return INF
    return Fraction(num, den) + 1


def chain_positions(n_joints: int, n_branches: int = 1) -> Fraction | float:
    """Shortcut for a subgraph holding ``n_joints`` revolute joints and ``n_branches`` fingertips."""
    den = SPATIAL_FREEDOM * n_branches - n_joints
    if den <= 0:
        return INF
    return Fraction(STRUCTURAL_PER_JOINT * n_joints, den) + 1


@dataclass
class Violation:
    subgraph: Subgraph
    notation: str
    m: Fraction

    def __str__(self) -> str:
        where = "root" if self.subgraph.root == 0 else f"fingertip {self.subgraph.root}"
        return f"{self.notation} (rooted at {where}, branches {list(self.subgraph.branches)}): m = {format_rational(self.m)}"


@dataclass
class SolvabilityReport:
    topology: TreeTopology
    solvable: bool
    M: Fraction | float
    violations: list[Violation] = field(default_factory=list)
    unconstrained: bool = False
    checked: int = 0

    @property
    def exact_positions(self) -> int | None:
        """Integer position count offered for exact synthesis (``floor(M)``)."""
        if self.M == INF:
            return None
        return math.floor(self.M)

    def summary(self) -> str:
        if self.unconstrained:
            return "Not solvable: the tree imposes no constraint on the task"
        if self.solvable:
            return f"Solvable m = {format_rational(self.M)}"
        if self.M < 2:
            return f"Not solvable: m = {format_rational(self.M)} < 2"
        return "Not solvable: " + "; ".join(str(v) for v in self.violations)


def format_rational(x) -> str:
    if x == INF:
        return "inf"
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def is_solvable(t: TreeTopology, constraints: dict[int, int] | None = None) -> SolvabilityReport:
    """Check the whole tree and every (root placement, branch subset) subgraph.

    ``constraints`` maps end-effector edge ids to extra constraint counts.
    """
    ees = t.end_effectors()
    full = SolvabilityVectors.for_subgraph(t, set(t.live_edges()), ees, constraints)
    M = positions(full)
    if M == INF:
        return SolvabilityReport(t, False, M, unconstrained=True)
    report = SolvabilityReport(t, False, M)
    for sub, tree, edges in iter_subtrees(t):
        m = positions(SolvabilityVectors.for_subgraph(tree, edges, sub.branches, constraints))
        report.checked += 1
        if m < M:
            report.violations.append(Violation(sub, subgraph_notation(tree, edges), m))
    report.solvable = M >= 2 and not report.violations
    return report


def contact_mobility(n_links: int, joint_freedoms: Sequence[int]) -> int:
    """Mobility ``6(n-1) - sum(6 - f_i)`` of the closed chain formed with an object."""
    return 6 * (n_links - 1) - sum(6 - f for f in joint_freedoms)


class StructureTable:
    """Subgraph edge sets of a parent-pointer array, independent of joint counts.

    Lets the enumerator test many joint arrays against one tree shape without
    re-deriving the re-rooted subgraphs each time.
    """

    def __init__(self, parents: Sequence[int]):
        shape = TreeTopology(tuple(parents), (1,) * len(parents))
        self.n_branches = shape.n_branches
        self.edges = [e - 1 for e in shape.live_edges()]
        self.subgraphs = [
            (tuple(sorted(e - 1 for e in edges)), len(sub.branches))
            for sub, _, edges in iter_subtrees(shape)
        ]

    def positions(self, joints: Sequence[int]) -> Fraction | float:
        return chain_positions(sum(joints[i] for i in self.edges), self.n_branches)

    def solvable(self, joints: Sequence[int]) -> bool:
        M = self.positions(joints)
        if M == INF or M < 2:
            return False
        for idx, nb in self.subgraphs:
            if chain_positions(sum(joints[i] for i in idx), nb) < M:
                return False
        return True

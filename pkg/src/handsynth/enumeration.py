"""Type synthesis: candidate tree topologies for a task size.

The generator follows the ordering rules of the parent-pointer search
(non-decreasing parents, end-effectors numbered last, siblings among the
end-effectors in non-decreasing joint order). Those rules do not remove every
isomorphic duplicate when two internal edges share a parent, so each atlas
also records the isomorphism classes found by :func:`canonical_key`.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterator

from .solvability import StructureTable, is_solvable
from .topology import MAX_EDGE_JOINTS, TreeTopology, canonical_key

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnumerationQuery:
    m: int
    b: int
    e: int

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("need at least two positions")
        if not 1 <= self.b <= self.e:
            raise ValueError("need 1 <= branches <= edges")


@dataclass
class Atlas:
    query: EnumerationQuery
    total_joints: Fraction
    joint_array_count: int = 0
    parent_array_count: int = 0
    candidates: list[TreeTopology] = field(default_factory=list)
    diagnostic: str = ""

    @property
    def isomorphism_classes(self) -> dict[str, list[TreeTopology]]:
        classes: dict[str, list[TreeTopology]] = {}
        for t in self.candidates:
            classes.setdefault(canonical_key(t), []).append(t)
        return classes

    @property
    def unique_candidates(self) -> list[TreeTopology]:
        """First representative of each isomorphism class, in search order."""
        return [members[0] for members in self.isomorphism_classes.values()]

    @property
    def duplicates(self) -> list[tuple[TreeTopology, TreeTopology]]:
        """(kept, duplicate) pairs the ordering rules let through."""
        return [(ms[0], d) for ms in self.isomorphism_classes.values() for d in ms[1:]]


def required_joints(m: int, b: int) -> Fraction:
    """Total joints of a tree with ``b`` fingertips sized for ``m`` positions."""
    return Fraction((m - 1) * 6 * b, m + 3)


def parent_pointer_arrays(b: int, e: int) -> list[tuple[int, ...]]:
    """Reduced tree shapes with ``e`` edges whose last ``b`` edges are the end-effectors.

    Internal edges must have at least two children; a single child would be
    a serial continuation of the same chain.
    """
    n_internal = e - b
    out = []

    def rec(p: list[int]):
        i = len(p) + 1
        if i > e:
            counts = [0] * (e + 1)
            for v in p:
                counts[v] += 1
            if all(counts[k] >= 2 for k in range(1, n_internal + 1)):
                out.append(tuple(p))
            return
        hi = i - 1 if i <= n_internal else n_internal
        for v in range(p[-1], hi + 1):
            rec(p + [v])

    rec([0])
    return out


def _compositions(total: int, n: int, lo: int = 1, hi: int = MAX_EDGE_JOINTS) -> Iterator[tuple[int, ...]]:
    if n == 0:
        if total == 0:
            yield ()
        return
    for v in range(lo, hi + 1):
        rest = total - v
        if (n - 1) * lo <= rest <= (n - 1) * hi:
            for tail in _compositions(rest, n - 1, lo, hi):
                yield (v,) + tail


def joint_arrays(p, J: int, e: int | None = None, b: int | None = None) -> list[tuple[int, ...]]:
    """Digit vectors in ``[1, 5]`` summing to ``J``, ordered lexicographically.

    Adjacent end-effectors sharing a parent must have non-decreasing joint
    counts, which removes the sibling permutations among fingertips.
    """
    e = len(p) if e is None else e
    if b is None:
        b = len(TreeTopology(tuple(p), (1,) * e).end_effectors())
    first_ee = e - b + 1
    out = []
    for d in _compositions(J, e):
        ok = True
        for k in range(first_ee + 1, e + 1):
            if p[k - 1] == p[k - 2] and d[k - 1] < d[k - 2]:
                ok = False
                break
        if ok:
            out.append(d)
    return out


def _search_one(args) -> tuple[int, list[tuple[int, ...]]]:
    p, J, e, b = args
    arrays = joint_arrays(p, J, e, b)
    table = StructureTable(p)
    return len(arrays), [d for d in arrays if table.solvable(d)]


def topology_search(q: EnumerationQuery, workers: int = 1) -> Atlas:
    J = required_joints(q.m, q.b)
    atlas = Atlas(q, J)
    if J.denominator != 1:
        atlas.diagnostic = f"no exact-synthesis topology: total joints {J} is not an integer"
        return atlas
    J = int(J)
    if not q.e <= J <= MAX_EDGE_JOINTS * q.e:
        atlas.diagnostic = f"{J} joints cannot be spread over {q.e} edges with 1..{MAX_EDGE_JOINTS} joints each"
        return atlas
    parents = parent_pointer_arrays(q.b, q.e)
    atlas.parent_array_count = len(parents)
    jobs = [(p, J, q.e, q.b) for p in parents]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_search_one, jobs))
    else:
        results = [_search_one(job) for job in jobs]
    for p, (n_arrays, solvable) in zip(parents, results):
        atlas.joint_array_count += n_arrays
        atlas.candidates.extend(TreeTopology(p, d) for d in solvable)
    atlas.candidates.sort(key=lambda t: (t.parents, t.joints))
    n_dup = len(atlas.duplicates)
    if n_dup:
        log.info("m=%d b=%d e=%d: %d candidates fall in an already seen isomorphism class", q.m, q.b, q.e, n_dup)
    return atlas


def search_range(m: int, b: int, e_lo: int, e_hi: int, workers: int = 1) -> list[Atlas]:
    return [topology_search(EnumerationQuery(m, b, e), workers) for e in range(max(e_lo, b), e_hi + 1)]


def brute_force_candidates(m: int, b: int, e: int) -> set[str]:
    """Canonical keys of every solvable reduced tree, with no ordering rules.

    Exhaustive over all parent arrays with ``p[i] < i`` and all joint arrays,
    deduplicated by canonical key and checked with the full
    :func:`is_solvable` report rather than the enumerator's fast path.
    Practical for ``e <= 5``.
    """
    J = required_joints(m, b)
    if J.denominator != 1:
        return set()
    J = int(J)
    shapes = []
    for p in product(*[range(i) for i in range(1, e + 1)]):
        t = TreeTopology(p, (1,) * e)
        if t.n_branches == b and t.is_reduced():
            shapes.append(p)
    trees = {}
    for p in shapes:
        for d in _compositions(J, e):
            t = TreeTopology(p, d)
            trees.setdefault(canonical_key(t), t)
    return {key for key, t in trees.items() if is_solvable(t).solvable}

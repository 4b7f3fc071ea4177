"""Rooted-tree hand topologies as parent-pointer and joint arrays.

Edges are numbered from 1. ``parents[i-1]`` is the parent edge of edge ``i``
(0 when the edge is incident at the root vertex, -1 when the edge has been
removed). ``joints[i-1]`` is the number of revolute joints in that edge's
serial chain (-1 for removed edges).
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator

MAX_EDGE_JOINTS = 5
REMOVED = -1


class TopologyError(ValueError):
    pass


class NotationError(TopologyError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


@dataclass(frozen=True)
class TreeTopology:
    parents: tuple[int, ...]
    joints: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(int(v) for v in self.parents))
        object.__setattr__(self, "joints", tuple(int(v) for v in self.joints))
        p, j = self.parents, self.joints
        if len(p) != len(j):
            raise TopologyError("parent and joint arrays differ in length")
        if not p:
            raise TopologyError("topology has no edges")
        live = self.live_edges()
        if not live:
            raise TopologyError("topology has no live edges")
        for i in range(1, len(p) + 1):
            pi, ji = p[i - 1], j[i - 1]
            if pi == REMOVED:
                continue
            if ji < 1:
                raise TopologyError(f"edge {i} has {ji} joints")
            if not 0 <= pi <= len(p) or pi == i:
                raise TopologyError(f"edge {i} has invalid parent {pi}")
            if pi and p[pi - 1] == REMOVED:
                raise TopologyError(f"edge {i} hangs from removed edge {pi}")
        if not any(p[i - 1] == 0 for i in live):
            raise TopologyError("no edge is incident at the root")
        # every live edge must reach the root without cycling
        for i in live:
            seen = set()
            while i != 0:
                if i in seen:
                    raise TopologyError("parent pointers contain a cycle")
                seen.add(i)
                i = p[i - 1]

    @classmethod
    def parse(cls, text: str, max_joints: int | None = MAX_EDGE_JOINTS) -> TreeTopology:
        return parse_notation(text, max_joints)

    @property
    def n_edges(self) -> int:
        return len(self.parents)

    @property
    def n_branches(self) -> int:
        return len(self.end_effectors())

    @property
    def total_joints(self) -> int:
        return sum(self.joints[i - 1] for i in self.live_edges())

    def live_edges(self) -> list[int]:
        return [i for i, v in enumerate(self.parents, 1) if v != REMOVED]

    def children(self, edge: int) -> list[int]:
        return [i for i, v in enumerate(self.parents, 1) if v == edge]

    def end_effectors(self) -> list[int]:
        referenced = {v for v in self.parents if v > 0}
        return [i for i in self.live_edges() if i not in referenced]

    def path(self, edge: int) -> list[int]:
        """Edges from ``edge`` up to the root, ``edge`` first."""
        out = []
        while edge != 0:
            out.append(edge)
            edge = self.parents[edge - 1]
        return out

    def is_reduced(self) -> bool:
        """True when every internal edge splits into at least two children."""
        return all(len(self.children(i)) != 1 for i in self.live_edges())

    def is_canonical_order(self) -> bool:
        """Parent pointers non-decreasing with ``p[i] < i``: the enumeration layout."""
        p = self.parents
        return all(0 <= p[i] < i + 1 for i in range(len(p))) and all(
            p[i] >= p[i - 1] for i in range(1, len(p))
        )

    def notation(self) -> str:
        return format_notation(self)

    def __str__(self) -> str:
        return self.notation()


@dataclass(frozen=True)
class BranchSet:
    branches: tuple[int, ...]
    path_matrix: tuple[tuple[bool, ...], ...]

    def row(self, branch: int) -> tuple[bool, ...]:
        return self.path_matrix[self.branches.index(branch)]


# --- notation -------------------------------------------------------------

_TOKEN = re.compile(r"\s*(\d+)?\s*(R)?\s*", re.IGNORECASE)


class _Parser:
    def __init__(self, text: str, max_joints: int | None):
        self.text = text
        self.pos = 0
        self.max_joints = max_joints

    def error(self, msg: str, pos: int | None = None):
        raise NotationError(msg, self.text, self.pos if pos is None else pos)

    def peek(self) -> str:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def count(self) -> int:
        start = self.pos
        m = _TOKEN.match(self.text, self.pos)
        digits, rev = m.group(1), m.group(2)
        if digits is None and rev is None:
            self.error("expected a joint count")
        self.pos = m.end()
        n = int(digits) if digits is not None else 1
        if rev is not None and n == 0:
            self.error("0R is not a joint count", start)
        if self.max_joints is not None and n > self.max_joints:
            self.error(f"edge with {n} joints exceeds {self.max_joints}", start)
        return n

    def chain(self, top: bool) -> tuple[int, list]:
        start = self.pos
        n = self.count()
        kids = []
        if self.peek() == "-":
            self.pos += 1
            self.expect("(")
            kids.append(self.chain(False))
            while self.peek() == ",":
                self.pos += 1
                kids.append(self.chain(False))
            self.expect(")")
            if len(kids) < 2:
                self.error("a split needs at least two branches", self.pos - 1)
        if n == 0 and not (top and kids):
            self.error("zero-joint chain is only allowed as the wrist of a split", start)
        return n, kids

    def parse(self) -> tuple[int, list]:
        node = self.chain(True)
        if self.peek():
            self.error("unexpected trailing text")
        return node


def parse_notation(text: str, max_joints: int | None = MAX_EDGE_JOINTS) -> TreeTopology:
    """Parse ``SC-(B1,...,Bb)`` notation; edges are numbered breadth first.

    Joint counts may carry an ``R`` suffix (``2R``, bare ``R`` meaning 1).
    A leading ``0`` denotes a hand without a wrist.
    """
    n, kids = _Parser(text, max_joints).parse()
    parents: list[int] = []
    joints: list[int] = []
    if n == 0:
        queue = [(0, k) for k in kids]
    else:
        queue = [(0, (n, kids))]
    while queue:
        nxt = []
        for parent, (count, sub) in queue:
            parents.append(parent)
            joints.append(count)
            me = len(parents)
            nxt.extend((me, k) for k in sub)
        queue = nxt
    return TreeTopology(tuple(parents), tuple(joints))


def format_notation(t: TreeTopology) -> str:
    def fmt(edge: int) -> str:
        kids = t.children(edge)
        s = str(t.joints[edge - 1])
        if kids:
            s += "-(" + ",".join(fmt(k) for k in kids) + ")"
        return s

    roots = t.children(0)
    if len(roots) == 1:
        return fmt(roots[0])
    return "0-(" + ",".join(fmt(k) for k in roots) + ")"


# --- structure queries ----------------------------------------------------

def end_effectors(t: TreeTopology) -> list[int]:
    return t.end_effectors()


def branch_set(t: TreeTopology) -> BranchSet:
    ees = t.end_effectors()
    rows = []
    for b in ees:
        on = set(t.path(b))
        rows.append(tuple(i in on for i in range(1, t.n_edges + 1)))
    return BranchSet(tuple(ees), tuple(rows))


@dataclass(frozen=True)
class Subgraph:
    """A root placement plus a set of end-effectors taken as branches.

    ``root`` is 0 for the original root vertex or the end-effector edge used
    as the new root.
    """

    root: int
    branches: tuple[int, ...]


def subgraph_combinations(t: TreeTopology) -> list[Subgraph]:
    """All root-to-end-effector subgraphs checked for solvability.

    Every non-empty subset of branches under the original root, plus every
    subset of two or more fingertips under a re-rooting at one of them. The
    re-rooted subgraph of a subset does not depend on which member is the
    root, so the smallest member is used, giving ``2(2^b - 1) - b`` entries.
    """
    ees = t.end_effectors()
    out = []
    for r in range(1, len(ees) + 1):
        for subset in combinations(ees, r):
            out.append(Subgraph(0, subset))
    for r in range(2, len(ees) + 1):
        for subset in combinations(ees, r):
            out.append(Subgraph(subset[0], subset[1:]))
    return out


def remove_common_edges(t: TreeTopology) -> TreeTopology:
    ees = t.end_effectors()
    common = set(t.path(ees[0]))
    for b in ees[1:]:
        common &= set(t.path(b))
    if len(ees) == 1:
        # a single serial chain has no relative motion to strip
        return t
    p = list(t.parents)
    j = list(t.joints)
    for i in common:
        p[i - 1] = REMOVED
        j[i - 1] = REMOVED
    for i, v in enumerate(p):
        if v in common:
            p[i] = 0
    return TreeTopology(tuple(p), tuple(j))


def _reattach_path_siblings(p: list[int], new_root: int) -> list[int]:
    """Hang every edge adjacent to the old-root-to-new-root path from that path."""
    joint = new_root
    while joint != 0:
        up = p[joint - 1]
        for i in range(1, len(p) + 1):
            if p[i - 1] == up and i != joint:
                p[i - 1] = joint
        joint = up
    return p


def _reverse_path(p: list[int], path: list[int]) -> list[int]:
    prev = 0
    for q in path:
        p[q - 1] = prev
        prev = q
    return p


def reroot(t: TreeTopology, new_root: int, trace: list | None = None) -> TreeTopology:
    """Move the root vertex to the fingertip of end-effector ``new_root``.

    Expects common edges to be removed already. When ``trace`` is a list, the
    parent array after re-attaching path siblings is appended to it.
    """
    if new_root not in t.end_effectors():
        raise TopologyError(f"edge {new_root} is not an end-effector")
    path = t.path(new_root)
    p = _reattach_path_siblings(list(t.parents), new_root)
    if trace is not None:
        trace.append(tuple(p))
    p = _reverse_path(p, path)
    return TreeTopology(tuple(p), t.joints)


def subgraph_edges(t: TreeTopology, sub: Subgraph) -> tuple[TreeTopology, set[int]]:
    """Tree (re-rooted when needed) and the edge set spanned by ``sub``."""
    tree = t
    if sub.root:
        tree = reroot(remove_common_edges(t), sub.root)
    edges: set[int] = set()
    for b in sub.branches:
        edges.update(tree.path(b))
    return tree, edges


# --- isomorphism ----------------------------------------------------------

def _subtree_key(t: TreeTopology, edge: int) -> tuple:
    kids = sorted(_subtree_key(t, k) for k in t.children(edge))
    return (t.joints[edge - 1], tuple(kids))


def canonical_key(t: TreeTopology) -> str:
    """String that is equal for two topologies exactly when they are isomorphic."""

    def render(key) -> str:
        n, kids = key
        return str(n) + ("(" + ",".join(render(k) for k in kids) + ")" if kids else "")

    roots = sorted(_subtree_key(t, k) for k in t.children(0))
    return "[" + ",".join(render(k) for k in roots) + "]"


def canonical_form(t: TreeTopology) -> TreeTopology:
    """Breadth-first renumbering with sibling subtrees in sorted order."""
    parents: list[int] = []
    joints: list[int] = []

    def ordered(edge: int) -> list[int]:
        return sorted(t.children(edge), key=lambda k: _subtree_key(t, k))

    queue = [(0, k) for k in ordered(0)]
    while queue:
        nxt = []
        for parent, edge in queue:
            parents.append(parent)
            joints.append(t.joints[edge - 1])
            me = len(parents)
            nxt.extend((me, k) for k in ordered(edge))
        queue = nxt
    return TreeTopology(tuple(parents), tuple(joints))


def is_isomorphic(a: TreeTopology, b: TreeTopology) -> bool:
    return canonical_key(a) == canonical_key(b)


def iter_subtrees(t: TreeTopology) -> Iterator[tuple[Subgraph, TreeTopology, set[int]]]:
    stripped = remove_common_edges(t) if t.n_branches > 1 else t
    rerooted: dict[int, TreeTopology] = {0: t}
    for sub in subgraph_combinations(t):
        if sub.root not in rerooted:
            rerooted[sub.root] = reroot(stripped, sub.root)
        tree = rerooted[sub.root]
        edges: set[int] = set()
        for b in sub.branches:
            edges.update(tree.path(b))
        yield sub, tree, edges


def subgraph_notation(tree: TreeTopology, edges: set[int]) -> str:
    """Notation of the part of ``tree`` restricted to ``edges``."""

    def fmt(edge: int) -> str:
        kids = [k for k in tree.children(edge) if k in edges]
        s = f"{tree.joints[edge - 1]}R" if tree.joints[edge - 1] != 1 else "R"
        if kids:
            s += "-(" + ",".join(fmt(k) for k in kids) + ")"
        return s

    roots = [k for k in tree.children(0) if k in edges]
    if len(roots) == 1:
        return fmt(roots[0])
    return "0-(" + ",".join(fmt(k) for k in roots) + ")"


# --- DOT export -----------------------------------------------------------

def to_dot(t: TreeTopology, name: str = "hand") -> str:
    """Graphviz digraph: vertices are links, edges are serial chains."""
    lines = [f'digraph "{name}" {{', '  label="' + format_notation(t) + '";']
    lines.append('  v0 [label="root", shape=doublecircle];')
    ees = set(t.end_effectors())
    for i in t.live_edges():
        shape = "box" if i in ees else "circle"
        lines.append(f'  v{i} [label="{i}", shape={shape}];')
    for i in t.live_edges():
        lines.append(f'  v{t.parents[i - 1]} -> v{i} [label="{t.joints[i - 1]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Forward kinematics of tree topologies.

:func:`build_fk` assembles chains, tip contact points and splitters from the
parent-pointer array and flattens them into per-branch ordered joint lists.
Joints are numbered depth first, so a branch list is the shared prefix of
its palms followed by its own chain. Branches are ordered by end-effector
edge id.

Joint angles are relative to the reference configuration (position 1), so
every branch pose at position 1 is the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import screws
from .screws import IDENTITY, axis_exp, bracket, dq_mul, transform_line
from .solvability import is_solvable
from .topology import TreeTopology, TopologyError


@dataclass
class Chain:
    edge: int
    joints: list[int]
    attached_to: str | None = None


@dataclass
class TCP:
    edge: int


@dataclass
class Splitter:
    name: str
    edge: int | None
    children: list[int] = field(default_factory=list)


@dataclass
class FKProgram:
    topology: TreeTopology
    branch_edges: list[int]
    branch_joints: list[list[int]]
    edge_of_joint: list[int]
    chains: dict[int, Chain]
    tcps: list[TCP]
    splitters: list[Splitter]

    @property
    def n_joints(self) -> int:
        return len(self.edge_of_joint)

    @property
    def n_branches(self) -> int:
        return len(self.branch_joints)

    def branch_index(self, edge: int) -> int:
        return self.branch_edges.index(edge)


def build_fk(t: TreeTopology) -> FKProgram:
    if not t.is_reduced():
        raise TopologyError("topology is not reduced: an edge has a single child")
    live = t.live_edges()
    kids = {i: t.children(i) for i in [0] + live}
    ees = t.end_effectors()
    palms = [i for i in live if len(kids[i]) >= 2]
    wristless = len(kids[0]) >= 2

    chains = {i: Chain(i, []) for i in live}
    tcps = [TCP(i) for i in ees]
    splitters = [Splitter("sp0", None, list(kids[0]))] if wristless else []
    splitters += [Splitter(f"sp{i}", i, list(kids[i])) for i in palms]
    for sp in splitters:
        for c in sp.children:
            chains[c].attached_to = sp.name

    edge_of_joint: list[int] = []

    def number(edge: int):
        for _ in range(t.joints[edge - 1]):
            edge_of_joint.append(edge)
            chains[edge].joints.append(len(edge_of_joint) - 1)
        for c in kids[edge]:
            number(c)

    for c in kids[0]:
        number(c)

    branch_joints = []
    for ee in ees:
        path = list(reversed(t.path(ee)))
        branch_joints.append([j for e in path for j in chains[e].joints])
    return FKProgram(t, ees, branch_joints, edge_of_joint, chains, tcps, splitters)


@dataclass
class HandConfiguration:
    """Joint axes at the reference pose plus joint motion for every task slot.

    ``angles`` has shape ``(J, m_p)`` with a zero first column. ``rates`` and
    ``accels`` hold one length-``J`` row per velocity or acceleration slot.
    """

    axes: np.ndarray
    angles: np.ndarray
    rates: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    accels: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    @property
    def n_joints(self) -> int:
        return self.axes.shape[0]

    def lines(self) -> list[screws.PluckerLine]:
        return [screws.PluckerLine.from_vector(a) for a in self.axes]


@dataclass
class VelocitySlot:
    """Twists of every branch at one position (1-based)."""

    position: int
    twists: np.ndarray  # (b, 6)


@dataclass
class AccelerationSlot:
    """Accelerations of every branch at one position, paired with a velocity slot."""

    position: int
    velocity_slot: int
    accelerations: np.ndarray  # (b, 6)


@dataclass
class Task:
    positions: np.ndarray  # (b, m_p, 8) absolute fingertip poses
    velocities: list[VelocitySlot] = field(default_factory=list)
    accelerations: list[AccelerationSlot] = field(default_factory=list)

    @property
    def n_branches(self) -> int:
        return self.positions.shape[0]

    @property
    def n_positions(self) -> int:
        return self.positions.shape[1]

    @property
    def m(self) -> int:
        return self.n_positions + len(self.velocities) + len(self.accelerations)

    def relative_displacements(self) -> np.ndarray:
        """``P_1k`` with ``P_1k * P_1 = P_k`` for every branch, shape ``(b, m_p, 8)``."""
        P1 = self.positions[:, :1, :]
        return dq_mul(self.positions, screws.dq_conj(P1))

    def validate(self, prog: FKProgram | None = None):
        if self.positions.ndim != 3 or self.positions.shape[2] != 8:
            raise ValueError("positions must have shape (branches, positions, 8)")
        if prog is not None and self.n_branches != prog.n_branches:
            raise ValueError(f"task has {self.n_branches} branches, topology has {prog.n_branches}")
        for v in self.velocities:
            if not 1 <= v.position <= self.n_positions:
                raise ValueError(f"twist at position {v.position} outside 1..{self.n_positions}")
            if v.twists.shape != (self.n_branches, 6):
                raise ValueError("twist slot needs one 6-vector per branch")
        for a in self.accelerations:
            if not 0 <= a.velocity_slot < len(self.velocities):
                raise ValueError("acceleration refers to a missing velocity slot")
            if self.velocities[a.velocity_slot].position != a.position:
                raise ValueError(f"acceleration at position {a.position} needs a twist at that position")
            if a.accelerations.shape != (self.n_branches, 6):
                raise ValueError("acceleration slot needs one 6-vector per branch")


def _angles_at(cfg: HandConfiguration, position: int) -> np.ndarray:
    if not 1 <= position <= cfg.angles.shape[1]:
        raise IndexError(f"position {position} outside 1..{cfg.angles.shape[1]}")
    return cfg.angles[:, position - 1]


def branch_pose(cfg: HandConfiguration, prog: FKProgram, branch: int, position: int) -> np.ndarray:
    """Relative displacement of ``branch`` at ``position`` as an 8-vector."""
    theta = _angles_at(cfg, position)
    Q = IDENTITY.copy()
    for j in prog.branch_joints[branch]:
        Q = dq_mul(Q, axis_exp(cfg.axes[j], theta[j]))
    return Q


def displaced_axes(cfg: HandConfiguration, prog: FKProgram, branch: int, theta: np.ndarray) -> np.ndarray:
    """Axes of the branch joints at joint angles ``theta``, shape ``(n, 6)``."""
    G = IDENTITY.copy()
    out = []
    for j in prog.branch_joints[branch]:
        out.append(transform_line(cfg.axes[j], G))
        G = dq_mul(G, axis_exp(cfg.axes[j], theta[j]))
    return np.array(out)


def branch_twist(cfg: HandConfiguration, prog: FKProgram, branch: int, position: int, rates=None) -> np.ndarray:
    """Spatial twist ``sum_j S_j^t * rate_j`` of the branch at ``position``.

    ``rates`` defaults to the first stored rate row of ``cfg``.
    """
    rates = _rates_for(cfg, rates, "rates")
    S = displaced_axes(cfg, prog, branch, _angles_at(cfg, position))
    return rates[prog.branch_joints[branch]] @ S


def branch_acceleration(
    cfg: HandConfiguration, prog: FKProgram, branch: int, position: int, rates=None, accels=None
) -> np.ndarray:
    """Time derivative of the spatial twist: ``sum S_j acc_j + sum_{j<h} rate_j rate_h [S_j, S_h]``."""
    rates = _rates_for(cfg, rates, "rates")
    accels = _rates_for(cfg, accels, "accels")
    S = displaced_axes(cfg, prog, branch, _angles_at(cfg, position))
    idx = prog.branch_joints[branch]
    w = rates[idx]
    A = accels[idx] @ S
    for a in range(len(idx)):
        for h in range(a + 1, len(idx)):
            A = A + w[a] * w[h] * bracket(S[a], S[h])
    return A


def _rates_for(cfg: HandConfiguration, given, name: str) -> np.ndarray:
    if given is not None:
        return np.asarray(given, dtype=float)
    stored = getattr(cfg, name)
    if stored.size == 0:
        raise ValueError(f"configuration has no {name}")
    return stored[0]


def random_configuration(n_joints: int, n_positions: int, rng: np.random.Generator) -> HandConfiguration:
    """Unit directions, points in the unit cube, angles uniform in [-pi, pi]."""
    d = rng.normal(size=(n_joints, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    c = rng.uniform(-0.5, 0.5, size=(n_joints, 3))
    axes = np.concatenate([d, np.cross(c, d)], axis=1)
    angles = np.zeros((n_joints, n_positions))
    angles[:, 1:] = rng.uniform(-np.pi, np.pi, size=(n_joints, n_positions - 1))
    return HandConfiguration(axes, angles)


class UnsolvableTaskError(ValueError):
    pass


def check_task_size(t: TreeTopology, m: int):
    report = is_solvable(t)
    if not report.solvable:
        raise UnsolvableTaskError(f"{t}: {report.summary()}")
    if m > report.M:
        raise UnsolvableTaskError(f"{t} admits at most {report.exact_positions} task items, {m} requested")
    return report


def generate_task(
    t: TreeTopology,
    mp: int,
    velocity_positions=(),
    acceleration_positions=(),
    seed: int = 0,
    check: bool = True,
) -> tuple[Task, HandConfiguration]:
    """Sample a hand and evaluate it to get a task with a known exact solution.

    Each entry of ``velocity_positions`` adds a velocity slot at that
    position; each entry of ``acceleration_positions`` adds an acceleration
    slot there, paired with the first velocity slot at the same position.
    Fingertip poses at position 1 are the identity. ``check=False`` skips the
    solvability gate, e.g. for single-joint chains that reach two positions
    only because the task was generated by such a chain.
    """
    velocity_positions = list(velocity_positions)
    acceleration_positions = list(acceleration_positions)
    if check:
        check_task_size(t, mp + len(velocity_positions) + len(acceleration_positions))
    prog = build_fk(t)
    rng = np.random.default_rng(seed)
    cfg = random_configuration(prog.n_joints, mp, rng)
    nv, na = len(velocity_positions), len(acceleration_positions)
    cfg.rates = rng.normal(size=(nv, prog.n_joints))
    cfg.accels = rng.normal(size=(na, prog.n_joints))
    b = prog.n_branches
    poses = np.array([[branch_pose(cfg, prog, i, k) for k in range(1, mp + 1)] for i in range(b)])
    task = Task(poses.reshape(b, mp, 8))
    for s, pos in enumerate(velocity_positions):
        tw = np.array([branch_twist(cfg, prog, i, pos, cfg.rates[s]) for i in range(b)])
        task.velocities.append(VelocitySlot(pos, tw))
    for s, pos in enumerate(acceleration_positions):
        try:
            vs = velocity_positions.index(pos)
        except ValueError:
            raise ValueError(f"acceleration at position {pos} needs a velocity at that position") from None
        acc = np.array(
            [branch_acceleration(cfg, prog, i, pos, cfg.rates[vs], cfg.accels[s]) for i in range(b)]
        )
        task.accelerations.append(AccelerationSlot(pos, vs, acc))
    task.validate(prog)
    return task, cfg

"""Design equations of a tree topology as a flat residual system.

Unknowns, in order: 6 Plücker coordinates per joint, the relative joint
angles for positions 2..m_p (position-major), one row of joint rates per
velocity slot and one row of joint accelerations per acceleration slot.

Residuals, in order: 8 dual-quaternion components per (branch, position
k >= 2), 6 per branch and velocity slot, 6 per branch and acceleration slot,
then 2 Plücker conditions per joint (``|s|^2 - 1`` and ``s . s0``).

Everything is evaluated over a leading population axis so the genetic
search can score many design vectors at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fk import FKProgram, HandConfiguration, Task
from .screws import IDENTITY, axis_exp, bracket, dq_mul, normalize_line, transform_line


@dataclass(frozen=True)
class Layout:
    n_joints: int
    n_branches: int
    n_positions: int
    n_velocity: int
    n_acceleration: int

    @property
    def n_unknowns(self) -> int:
        J = self.n_joints
        return 6 * J + J * (self.n_positions - 1) + J * (self.n_velocity + self.n_acceleration)

    @property
    def n_position_residuals(self) -> int:
        return 8 * self.n_branches * (self.n_positions - 1)

    @property
    def n_motion_residuals(self) -> int:
        return 6 * self.n_branches * (self.n_velocity + self.n_acceleration)

    @property
    def n_equation_residuals(self) -> int:
        return self.n_position_residuals + self.n_motion_residuals

    @property
    def n_constraint_residuals(self) -> int:
        return 2 * self.n_joints

    @property
    def n_residuals(self) -> int:
        return self.n_equation_residuals + self.n_constraint_residuals

    @property
    def n_independent(self) -> int:
        return 6 * (self.n_positions - 1 + self.n_velocity + self.n_acceleration) * self.n_branches

    @property
    def n_equations(self) -> int:
        """Number of vector equations (dual-quaternion, twist or acceleration)."""
        return self.n_branches * (self.n_positions - 1 + self.n_velocity + self.n_acceleration)


class ResidualSystem:
    def __init__(self, task: Task, prog: FKProgram):
        task.validate(prog)
        self.task = task
        self.prog = prog
        J = prog.n_joints
        self.layout = Layout(J, prog.n_branches, task.n_positions, len(task.velocities), len(task.accelerations))
        self.targets = task.relative_displacements()[:, 1:, :]  # (b, K, 8)
        self.branches = [np.array(b) for b in prog.branch_joints]
        K = task.n_positions - 1
        self._sl_axes = slice(0, 6 * J)
        self._sl_angles = slice(6 * J, 6 * J + K * J)
        off = 6 * J + K * J
        nv, na = self.layout.n_velocity, self.layout.n_acceleration
        self._sl_rates = slice(off, off + nv * J)
        self._sl_accels = slice(off + nv * J, off + (nv + na) * J)

    # --- packing ----------------------------------------------------------

    def unpack(self, X: np.ndarray):
        X = np.atleast_2d(X)
        P = X.shape[0]
        L = self.layout
        J, K = L.n_joints, L.n_positions - 1
        axes = X[:, self._sl_axes].reshape(P, J, 6)
        angles = X[:, self._sl_angles].reshape(P, K, J)
        rates = X[:, self._sl_rates].reshape(P, L.n_velocity, J)
        accels = X[:, self._sl_accels].reshape(P, L.n_acceleration, J)
        return axes, angles, rates, accels

    def pack(self, cfg: HandConfiguration) -> np.ndarray:
        L = self.layout
        parts = [cfg.axes.reshape(-1), cfg.angles[:, 1:].T.reshape(-1)]
        if L.n_velocity:
            parts.append(np.asarray(cfg.rates).reshape(-1))
        if L.n_acceleration:
            parts.append(np.asarray(cfg.accels).reshape(-1))
        return np.concatenate(parts)

    def configuration(self, x: np.ndarray, project: bool = True) -> HandConfiguration:
        axes, angles, rates, accels = (a[0] for a in self.unpack(x))
        if project:
            axes = normalize_line(axes)
        full = np.concatenate([np.zeros((self.layout.n_joints, 1)), angles.T], axis=1)
        return HandConfiguration(axes.copy(), full, rates.copy(), accels.copy())

    def random_population(self, n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
        L = self.layout
        J, K = L.n_joints, L.n_positions - 1
        d = rng.normal(size=(n, J, 3))
        d /= np.linalg.norm(d, axis=-1, keepdims=True)
        c = rng.uniform(-scale, scale, size=(n, J, 3))
        axes = np.concatenate([d, np.cross(c, d)], axis=-1).reshape(n, -1)
        angles = rng.uniform(-np.pi, np.pi, size=(n, K * J))
        motion = rng.normal(size=(n, (L.n_velocity + L.n_acceleration) * J))
        return np.concatenate([axes, angles, motion], axis=1)

    # --- evaluation -------------------------------------------------------

    def _position_residuals(self, axes, angles) -> np.ndarray:
        # E[p, k, j] = exp of joint j at position k+2
        E = axis_exp(axes[:, None, :, :], angles)
        out = []
        for i, idx in enumerate(self.branches):
            Q = E[:, :, idx[0]]
            for j in idx[1:]:
                Q = dq_mul(Q, E[:, :, j])
            T = self.targets[i]
            sign = np.where(np.sum(Q * T, axis=-1, keepdims=True) < 0, -1.0, 1.0)
            out.append((Q - sign * T).reshape(Q.shape[0], -1))
        return np.concatenate(out, axis=1) if out else np.zeros((axes.shape[0], 0))

    def _displaced(self, axes, angles, position: int) -> list[np.ndarray]:
        """Per branch, joint axes displaced to ``position``: arrays of shape (P, n, 6)."""
        P = axes.shape[0]
        if position == 1:
            theta = np.zeros((P, self.layout.n_joints))
        else:
            theta = angles[:, position - 2, :]
        E = axis_exp(axes, theta)
        out = []
        for idx in self.branches:
            G = np.broadcast_to(IDENTITY, (P, 8))
            S = []
            for j in idx:
                S.append(transform_line(axes[:, j], G))
                G = dq_mul(G, E[:, j])
            out.append(np.stack(S, axis=1))
        return out

    def _motion_residuals(self, axes, angles, rates, accels) -> np.ndarray:
        task = self.task
        P = axes.shape[0]
        out = []
        cache: dict[int, list[np.ndarray]] = {}
        for v, slot in enumerate(task.velocities):
            S = cache.setdefault(slot.position, self._displaced(axes, angles, slot.position))
            for i, idx in enumerate(self.branches):
                V = np.einsum("pn,pnc->pc", rates[:, v, idx], S[i])
                out.append(V - slot.twists[i])
        for a, slot in enumerate(task.accelerations):
            S = cache.setdefault(slot.position, self._displaced(axes, angles, slot.position))
            for i, idx in enumerate(self.branches):
                w = rates[:, slot.velocity_slot, idx]
                A = np.einsum("pn,pnc->pc", accels[:, a, idx], S[i])
                Si = S[i]
                n = len(idx)
                for j in range(n - 1):
                    coeff = w[:, j, None] * w[:, j + 1 :]
                    br = bracket(Si[:, j : j + 1], Si[:, j + 1 :])
                    A = A + np.einsum("pn,pnc->pc", coeff, br)
                out.append(A - slot.accelerations[i])
        if not out:
            return np.zeros((P, 0))
        return np.concatenate(out, axis=1)

    def _constraint_residuals(self, axes) -> np.ndarray:
        s, s0 = axes[..., :3], axes[..., 3:]
        unit = np.sum(s * s, axis=-1) - 1.0
        orth = np.sum(s * s0, axis=-1)
        return np.stack([unit, orth], axis=-1).reshape(axes.shape[0], -1)

    def residuals_batch(self, X: np.ndarray) -> np.ndarray:
        axes, angles, rates, accels = self.unpack(X)
        parts = [self._position_residuals(axes, angles)]
        if self.task.velocities or self.task.accelerations:
            parts.append(self._motion_residuals(axes, angles, rates, accels))
        parts.append(self._constraint_residuals(axes))
        return np.concatenate(parts, axis=1)

    def residuals(self, x: np.ndarray) -> np.ndarray:
        return self.residuals_batch(np.asarray(x, dtype=float)[None])[0]

    def sse_batch(self, X: np.ndarray) -> np.ndarray:
        r = self.residuals_batch(X)
        return np.einsum("pi,pi->p", r, r)

    def equation_errors(self, x: np.ndarray) -> np.ndarray:
        """Norm of each vector equation residual (positions, then twists/accelerations)."""
        r = self.residuals(x)[: self.layout.n_equation_residuals]
        L = self.layout
        pos = r[: L.n_position_residuals].reshape(-1, 8)
        mot = r[L.n_position_residuals :].reshape(-1, 6)
        return np.concatenate([np.linalg.norm(pos, axis=1), np.linalg.norm(mot, axis=1)])

    def error(self, x: np.ndarray) -> float:
        """Average residual norm over all task equations."""
        e = self.equation_errors(x)
        return float(e.mean()) if e.size else 0.0

    # --- derivatives ------------------------------------------------------

    def jacobian(self, x: np.ndarray, fd_step: float = 1e-6) -> np.ndarray:
        """Analytic for position and Plücker rows, central differences for twist rows."""
        x = np.asarray(x, dtype=float)
        L = self.layout
        Jm = np.zeros((L.n_residuals, L.n_unknowns))
        axes, angles, rates, accels = (a[0] for a in self.unpack(x))
        J, K = L.n_joints, L.n_positions - 1
        if K > 0:
            self._position_jacobian(Jm, axes, angles)
        if L.n_motion_residuals:
            rows = slice(L.n_position_residuals, L.n_equation_residuals)
            n = L.n_unknowns
            h = fd_step * np.maximum(1.0, np.abs(x))
            X = np.repeat(x[None], 2 * n, axis=0)
            X[np.arange(n), np.arange(n)] += h
            X[n + np.arange(n), np.arange(n)] -= h
            a, an, r, ac = self.unpack(X)
            M = self._motion_residuals(a, an, r, ac)
            Jm[rows] = ((M[:n] - M[n:]) / (2 * h[:, None])).T
        # Plücker conditions
        base = L.n_equation_residuals
        for j in range(J):
            s, s0 = axes[j, :3], axes[j, 3:]
            Jm[base + 2 * j, 6 * j : 6 * j + 3] = 2 * s
            Jm[base + 2 * j + 1, 6 * j : 6 * j + 3] = s0
            Jm[base + 2 * j + 1, 6 * j + 3 : 6 * j + 6] = s
        return Jm

    def _position_jacobian(self, Jm: np.ndarray, axes: np.ndarray, angles: np.ndarray):
        J, K = self.layout.n_joints, self.layout.n_positions - 1
        half = 0.5 * angles  # (K, J)
        c, sn = np.cos(half), np.sin(half)
        E = axis_exp(axes[None], angles)  # (K, J, 8)
        # dE/dp for p in (s_x, s_y, s_z, s0_x, s0_y, s0_z, theta): (K, J, 7, 8)
        dE = np.zeros((K, J, 7, 8))
        for a in range(3):
            dE[:, :, a, 1 + a] = sn
            dE[:, :, 3 + a, 5 + a] = sn
        dE[:, :, 6, 0] = -0.5 * sn
        dE[:, :, 6, 1:4] = 0.5 * c[..., None] * axes[None, :, :3]
        dE[:, :, 6, 5:8] = 0.5 * c[..., None] * axes[None, :, 3:]
        row = 0
        for i, idx in enumerate(self.branches):
            n = len(idx)
            Eb = E[:, idx]  # (K, n, 8)
            pre = np.empty((K, n + 1, 8))
            suf = np.empty((K, n + 1, 8))
            pre[:, 0] = IDENTITY
            suf[:, n] = IDENTITY
            for a in range(n):
                pre[:, a + 1] = dq_mul(pre[:, a], Eb[:, a])
            for a in range(n - 1, -1, -1):
                suf[:, a] = dq_mul(Eb[:, a], suf[:, a + 1])
            # residual is Q - sign*T and the target term is constant
            D =dq_mul(dq_mul(pre[:, :n, None, :], dE[:, idx]), suf[:, 1:, None, :])  # (K, n, 7, 8)
            for k in range(K):
                r0 = row + 8 * k
                for a, j in enumerate(idx):
                    Jm[r0 : r0 + 8, 6 * j : 6 * j + 6] = D[k, a, :6].T
                    Jm[r0 : r0 + 8, 6 * J + k * J + j] = D[k, a, 6]
            row += 8 * K


def numerical_jacobian(system: ResidualSystem, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian, used as an independent check."""
    x = np.asarray(x, dtype=float)
    n = x.size
    X = np.repeat(x[None], 2 * n, axis=0)
    X[np.arange(n), np.arange(n)] += step
    X[n + np.arange(n), np.arange(n)] -= step
    R = system.residuals_batch(X)
    return ((R[:n] - R[n:]) / (2 * step)).T

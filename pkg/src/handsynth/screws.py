"""Screw-theory kernel: Plücker lines, twists and unit dual quaternions.

Conventions
-----------
* Quaternions are stored scalar-first, ``(w, x, y, z)``.
* A dual quaternion is an 8-vector ``(real | dual)``. A displacement that
  rotates by ``r`` and then translates by ``t`` has ``dual = 0.5 * t * r``.
* A line is ``(s, s0)`` with unit direction ``s`` and moment ``s0 = c x s``
  for any point ``c`` on the line. Twists use the same layout,
  ``(angular, linear)`` with the linear part taken at the origin.
* Products apply right to left: ``dq_mul(a, b)`` is ``b`` followed by ``a``.

The array functions broadcast over leading axes; the dataclasses are thin
value wrappers used at API boundaries and in result files.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

IDENTITY = np.array([1.0, 0, 0, 0, 0, 0, 0, 0])


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays of shape ``(..., 4)``."""
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(q: np.ndarray) -> np.ndarray:
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def dq_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dual quaternion product ``a * b`` over arrays of shape ``(..., 8)``."""
    ar, ad = a[..., :4], a[..., 4:]
    br, bd = b[..., :4], b[..., 4:]
    return np.concatenate([qmul(ar, br), qmul(ar, bd) + qmul(ad, br)], axis=-1)


def dq_conj(q: np.ndarray) -> np.ndarray:
    """Quaternion conjugate of both parts; the inverse of a unit dual quaternion."""
    return q * np.array([1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0])


def dq_from_rt(rotation: np.ndarray, translation: np.ndarray) -> np.ndarray:
    """Dual quaternion of rotation quaternion ``rotation`` followed by ``translation``."""
    rotation = np.asarray(rotation, dtype=float)
    t = np.concatenate([np.zeros(np.shape(translation)[:-1] + (1,)), translation], axis=-1)
    return np.concatenate([rotation, 0.5 * qmul(t, rotation)], axis=-1)


def dq_to_rt(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a unit dual quaternion into (rotation quaternion, translation)."""
    r = q[..., :4]
    t = 2.0 * qmul(q[..., 4:], qconj(r))
    return r, t[..., 1:]


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def dq_to_matrix(q: np.ndarray) -> np.ndarray:
    """4x4 homogeneous transform of a single unit dual quaternion."""
    r, t = dq_to_rt(np.asarray(q, dtype=float))
    T = np.eye(4)
    T[:3, :3] = quat_to_matrix(r)
    T[:3, 3] = t
    return T


def dq_transform_points(q: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Apply a unit dual quaternion to points of shape ``(..., 3)``."""
    r, t = dq_to_rt(q)
    p = np.concatenate([np.zeros(points.shape[:-1] + (1,)), points], axis=-1)
    rotated = qmul(qmul(r, p), qconj(r))[..., 1:]
    return rotated + t


def axis_exp(line: np.ndarray, theta) -> np.ndarray:
    """Rotation by ``theta`` about the line ``(s, s0)``.

    Computes ``cos(theta/2) + sin(theta/2) * (s + eps s0)`` without
    renormalising, so a line that violates its Plücker conditions yields a
    non-unit result. The solver relies on that to keep the map smooth.
    """
    line = np.asarray(line, dtype=float)
    half = 0.5 * np.asarray(theta, dtype=float)
    c = np.cos(half)[..., None]
    sn = np.sin(half)[..., None]
    zero = np.zeros_like(c)
    return np.concatenate([c, sn * line[..., :3], zero, sn * line[..., 3:]], axis=-1)


def transform_line(line: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Line (or twist) ``(s, s0)`` displaced by the unit dual quaternion ``q``."""
    zero = np.zeros(line.shape[:-1] + (1,))
    pure = np.concatenate([zero, line[..., :3], zero, line[..., 3:]], axis=-1)
    out = dq_mul(dq_mul(q, pure), dq_conj(q))
    return np.concatenate([out[..., 1:4], out[..., 5:8]], axis=-1)


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Lie bracket of twists ``(w, v)``: ``(wa x wb, wa x vb + va x wb)``."""
    wa, va = a[..., :3], a[..., 3:]
    wb, vb = b[..., :3], b[..., 3:]
    return np.concatenate([np.cross(wa, wb), np.cross(wa, vb) + np.cross(va, wb)], axis=-1)


def dq_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Norm of ``a - b`` with the sign of ``b`` chosen to treat ``q`` and ``-q`` alike."""
    return np.minimum(np.linalg.norm(a - b, axis=-1), np.linalg.norm(a + b, axis=-1))


def line_through(point, direction) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    return np.concatenate([d, np.cross(np.asarray(point, dtype=float), d)])


def normalize_line(line: np.ndarray) -> np.ndarray:
    """Project a 6-vector onto the Plücker quadric: unit direction, orthogonal moment."""
    s = line[..., :3]
    s0 = line[..., 3:]
    n = np.linalg.norm(s, axis=-1, keepdims=True)
    s = s / n
    s0 = s0 / n
    s0 = s0 - np.sum(s * s0, axis=-1, keepdims=True) * s
    return np.concatenate([s, s0], axis=-1)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


@dataclass(frozen=True)
class PluckerLine:
    direction: np.ndarray
    moment: np.ndarray

    @classmethod
    def through(cls, point, direction) -> PluckerLine:
        v = line_through(point, direction)
        return cls(v[:3], v[3:])

    @classmethod
    def from_vector(cls, v) -> PluckerLine:
        v = np.asarray(v, dtype=float)
        return cls(v[:3].copy(), v[3:].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.direction, self.moment])

    def is_valid(self, tol: float = 1e-9) -> bool:
        return (
            abs(np.linalg.norm(self.direction) - 1.0) <= tol
            and abs(float(np.dot(self.direction, self.moment))) <= tol
        )

    def point(self) -> np.ndarray:
        """Point on the line closest to the origin."""
        return np.cross(self.direction, self.moment) / np.dot(self.direction, self.direction)

    def transformed(self, D: DualQuaternion) -> PluckerLine:
        return PluckerLine.from_vector(transform_line(self.as_vector(), D.as_vector()))


@dataclass(frozen=True)
class Twist:
    angular: np.ndarray
    linear: np.ndarray

    @classmethod
    def from_vector(cls, v) -> Twist:
        v = np.asarray(v, dtype=float)
        return cls(v[:3].copy(), v[3:].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.angular, self.linear])


@dataclass(frozen=True)
class DualQuaternion:
    real: np.ndarray
    dual: np.ndarray

    @classmethod
    def identity(cls) -> DualQuaternion:
        return cls.from_vector(IDENTITY)

    @classmethod
    def from_vector(cls, v) -> DualQuaternion:
        v = np.asarray(v, dtype=float)
        return cls(v[:4].copy(), v[4:].copy())

    @classmethod
    def from_rotation_translation(cls, rotation, translation) -> DualQuaternion:
        return cls.from_vector(dq_from_rt(rotation, np.asarray(translation, dtype=float)))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.real, self.dual])

    def __mul__(self, other: DualQuaternion) -> DualQuaternion:
        return DualQuaternion.from_vector(dq_mul(self.as_vector(), other.as_vector()))

    def inverse(self) -> DualQuaternion:
        return DualQuaternion.from_vector(dq_conj(self.as_vector()))

    def is_unit(self, tol: float = 1e-9) -> bool:
        return (
            abs(np.dot(self.real, self.real) - 1.0) <= tol
            and abs(float(np.dot(self.real, self.dual))) <= tol
        )

    def matrix(self) -> np.ndarray:
        return dq_to_matrix(self.as_vector())

    def transform_points(self, points) -> np.ndarray:
        return dq_transform_points(self.as_vector(), np.asarray(points, dtype=float))

    def rotation_translation(self) -> tuple[np.ndarray, np.ndarray]:
        return dq_to_rt(self.as_vector())


def axis_exponential(S: PluckerLine, theta: float) -> DualQuaternion:
    return DualQuaternion.from_vector(axis_exp(S.as_vector(), theta))


def dq_multiply(a: DualQuaternion, b: DualQuaternion) -> DualQuaternion:
    return a * b


def relative_displacement(Pk: DualQuaternion, P1: DualQuaternion) -> DualQuaternion:
    """``P1k`` with ``P1k * P1 == Pk``."""
    return Pk * P1.inverse()


def transform_axis(S: PluckerLine, D: DualQuaternion) -> PluckerLine:
    return S.transformed(D)


def _screw_vector(x) -> np.ndarray:
    return x.as_vector() if isinstance(x, (Twist, PluckerLine)) else np.asarray(x, dtype=float)


def screw_bracket(a, b) -> np.ndarray:
    """Bracket of two weighted screws given as 6-vectors, twists or lines."""
    return bracket(_screw_vector(a), _screw_vector(b))

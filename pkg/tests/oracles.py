"""Homogeneous-matrix oracles, independent of the dual-quaternion kernel."""
import numpy as np


def rodrigues(axis, angle):
    k = np.asarray(axis, float) / np.linalg.norm(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def hom(R, t):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = t
    return T


def about_line(point, axis, angle):
    R = rodrigues(axis, angle)
    return hom(R, point - R @ point)


def about_plucker(line, angle):
    s, s0 = line[:3], line[3:]
    point = np.cross(s, s0) / np.dot(s, s)
    return about_line(point, s, angle)


def apply(T, points):
    return points @ T[:3, :3].T + T[:3, 3]


def chain_matrix(lines, angles):
    """Product of rotations about ``lines``, root-most first."""
    T = np.eye(4)
    for line, a in zip(lines, angles):
        T = T @ about_plucker(line, a)
    return T


def spatial_twist(Tdot, T):
    """(omega, v) of ``Tdot T^-1``, v being the velocity of the point at the origin."""
    X = Tdot @ np.linalg.inv(T)
    W = X[:3, :3]
    return np.array([W[2, 1], W[0, 2], W[1, 0], *X[:3, 3]])

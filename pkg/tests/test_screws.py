import numpy as np
import pytest
from hypothesis import given

from handsynth.screws import (
    IDENTITY,
    DualQuaternion,
    PluckerLine,
    Twist,
    axis_exp,
    axis_exponential,
    bracket,
    dq_conj,
    dq_distance,
    dq_from_rt,
    dq_mul,
    dq_multiply,
    dq_to_matrix,
    dq_transform_points,
    line_through,
    normalize_line,
    relative_displacement,
    screw_bracket,
    transform_axis,
    transform_line,
)
from oracles import about_line, apply, hom, rodrigues
from strategies import seeds


def random_displacement(rng):
    """(dual quaternion, matrix) built from an axis-angle pair and a translation."""
    u = rng.normal(size=3)
    u /= np.linalg.norm(u)
    phi = rng.uniform(-np.pi, np.pi)
    t = rng.uniform(-2, 2, size=3)
    q = np.concatenate([[np.cos(phi / 2)], np.sin(phi / 2) * u])
    return dq_from_rt(q, t), hom(rodrigues(u, phi), t)


def random_line(rng):
    return line_through(rng.uniform(-1, 1, 3), rng.normal(size=3))


PTS = np.array([[0.3, -1.2, 0.7], [1.0, 0.0, 0.0], [0.0, 2.0, -1.0], [0.0, 0.0, 0.0]])


# --- exponential --------------------------------------------------------------

def test_exponential_at_zero_is_identity():
    assert np.allclose(axis_exp(random_line(np.random.default_rng(0)), 0.0), IDENTITY)


def test_half_turn_about_z():
    q = axis_exp(line_through([0, 0, 0], [0, 0, 1]), np.pi)
    assert np.allclose(q, [0, 0, 0, 1, 0, 0, 0, 0], atol=1e-15)


def test_quarter_turn_about_offset_axis():
    q = axis_exp(line_through([1, 0, 0], [0, 0, 1]), np.pi / 2)
    out = dq_transform_points(q, np.array([[1.0, 0, 0], [2.0, 0, 0]]))
    assert np.allclose(out, [[1, 0, 0], [1, 1, 0]], atol=1e-12)


@given(seeds)
def test_exponential_matches_matrix_oracle(seed):
    rng = np.random.default_rng(seed)
    c, d = rng.uniform(-1, 1, 3), rng.normal(size=3)
    theta = rng.uniform(-np.pi, np.pi)
    q = axis_exp(line_through(c, d), theta)
    assert np.abs(apply(about_line(c, d, theta), PTS) - dq_transform_points(q, PTS)).max() < 1e-10
    assert abs(np.dot(q[:4], q[:4]) - 1) < 1e-12 and abs(np.dot(q[:4], q[4:])) < 1e-12


# --- products -----------------------------------------------------------------

def test_product_matches_matrix_oracle_on_many_pairs():
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(1000):
        a, Ta = random_displacement(rng)
        b, Tb = random_displacement(rng)
        got = dq_transform_points(dq_mul(a, b), PTS)
        worst = max(worst, np.abs(got - apply(Ta @ Tb, PTS)).max())
    assert worst < 1e-10


def test_product_identities():
    rng = np.random.default_rng(2)
    x, _ = random_displacement(rng)
    assert np.allclose(dq_mul(IDENTITY, x), x)
    assert np.allclose(dq_mul(x, dq_conj(x)), IDENTITY)
    z = line_through([0, 0, 0], [0, 0, 1])
    half = dq_mul(axis_exp(z, np.pi / 2), axis_exp(z, np.pi / 2))
    assert np.allclose(dq_to_matrix(half), about_line(np.zeros(3), [0, 0, 1], np.pi), atol=1e-12)


@given(seeds)
def test_product_is_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_displacement(rng)[0] for _ in range(3))
    assert np.allclose(dq_mul(dq_mul(a, b), c), dq_mul(a, dq_mul(b, c)), atol=1e-12)


@given(seeds)
def test_long_products_stay_unit(seed):
    rng = np.random.default_rng(seed)
    q = IDENTITY.copy()
    for _ in range(18):
        q = dq_mul(q, axis_exp(random_line(rng), rng.uniform(-np.pi, np.pi)))
    assert DualQuaternion.from_vector(q).is_unit(1e-9)


def test_relative_displacement():
    rng = np.random.default_rng(3)
    X = DualQuaternion.from_vector(random_displacement(rng)[0])
    assert np.allclose(relative_displacement(X, X).as_vector(), IDENTITY)
    assert np.allclose(relative_displacement(X, DualQuaternion.identity()).as_vector(), X.as_vector())
    (pk, Tk), (p1, T1) = random_displacement(rng), random_displacement(rng)
    rel = relative_displacement(DualQuaternion.from_vector(pk), DualQuaternion.from_vector(p1))
    got = (rel * DualQuaternion.from_vector(p1)).transform_points(PTS)
    assert np.abs(got - apply(Tk, PTS)).max() < 1e-10
    assert np.abs(rel.transform_points(PTS) - apply(Tk @ np.linalg.inv(T1), PTS)).max() < 1e-10


def test_dual_quaternion_wrapper():
    rng = np.random.default_rng(4)
    v, T = random_displacement(rng)
    D = DualQuaternion.from_vector(v)
    assert np.allclose(D.matrix(), T)
    assert np.allclose((D * D.inverse()).as_vector(), IDENTITY)
    r, t = D.rotation_translation()
    assert np.allclose(DualQuaternion.from_rotation_translation(r, t).as_vector(), v)
    assert np.allclose(dq_multiply(D, D).as_vector(), dq_mul(v, v))


# --- line transforms ----------------------------------------------------------

def test_transform_axis_examples():
    S = PluckerLine.through([0, 0, 0], [0, 0, 1])
    assert np.allclose(transform_axis(S, DualQuaternion.identity()).as_vector(), S.as_vector())
    Rx = axis_exponential(PluckerLine.through([0, 0, 0], [1, 0, 0]), np.pi / 2)
    out = transform_axis(S, Rx)
    assert np.allclose(np.abs(out.direction), [0, 1, 0]) and np.allclose(out.moment, 0)


@given(seeds)
def test_transform_axis_matches_two_point_oracle(seed):
    rng = np.random.default_rng(seed)
    c, d = rng.uniform(-1, 1, 3), rng.normal(size=3)
    D, T = random_displacement(rng)
    moved = transform_line(line_through(c, d), D)
    p, q = apply(T, np.array([c, c + d]))
    want = line_through(p, q - p)
    assert np.abs(moved - want).max() < 1e-10
    assert PluckerLine.from_vector(moved).is_valid()


@given(seeds)
def test_transform_commutes_with_exponential(seed):
    rng = np.random.default_rng(seed)
    S = random_line(rng)
    D, _ = random_displacement(rng)
    theta = rng.uniform(-np.pi, np.pi)
    lhs = axis_exp(transform_line(S, D), theta)
    rhs = dq_mul(dq_mul(D, axis_exp(S, theta)), dq_conj(D))
    assert np.abs(lhs - rhs).max() < 1e-10


# --- bracket ------------------------------------------------------------------

def test_bracket_examples():
    rng = np.random.default_rng(5)
    S = random_line(rng)
    assert np.allclose(bracket(S, S), 0)
    z = line_through([0, 0, 0], [0, 0, 1])
    x = line_through([0, 0, 0], [1, 0, 0])
    assert np.allclose(bracket(z, x), [0, 1, 0, 0, 0, 0])
    assert np.allclose(screw_bracket(Twist.from_vector(z), Twist.from_vector(x)), [0, 1, 0, 0, 0, 0])


@given(seeds)
def test_bracket_matches_adjoint_derivative(seed):
    rng = np.random.default_rng(seed)
    Sa, Sb = random_line(rng), random_line(rng)
    wa, wb = rng.uniform(0.5, 2, 2)
    h = 1e-5
    fd = (transform_line(Sb, axis_exp(Sa, h)) - transform_line(Sb, axis_exp(Sa, -h))) / (2 * h)
    assert np.abs(wa * wb * fd - bracket(wa * Sa, wb * Sb)).max() < 1e-6
    assert np.allclose(bracket(Sa, Sb), -bracket(Sb, Sa))


# --- double cover -------------------------------------------------------------

@given(seeds)
def test_distance_ignores_sign(seed):
    rng = np.random.default_rng(seed)
    a, _ = random_displacement(rng)
    b, _ = random_displacement(rng)
    assert dq_distance(a, -a) == pytest.approx(0.0)
    assert dq_distance(a, b) == pytest.approx(dq_distance(a, -b))
    assert np.allclose(dq_transform_points(-a, PTS), dq_transform_points(a, PTS))


def test_normalize_line_projects_onto_quadric():
    v = np.array([0.0, 0.0, 2.0, 1.0, 1.0, 1.0])
    line = normalize_line(v)
    assert PluckerLine.from_vector(line).is_valid()
    assert np.allclose(line, [0, 0, 1, 0.5, 0.5, 0])

from math import factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _problems import random_connection, random_oper, random_unipotent
from gaudin_opers.errors import NumericError, ValidationError
from gaudin_opers.miura import epsilon_coordinates, miura_scalar_oper
from gaudin_opers.operforms import (MatrixOper, canonical_form, companion_oper, diagonal_oper,
                                    gauge_transform, mat_mul, oper_coordinate_change,
                                    rs_residue, scalar_operator, schwarzian)
from gaudin_opers.ratfun import LocalJet, Poly, RatFun, local_jet, sample_points

X = Poly.x()
PTS = sample_points(10, np.random.default_rng(17), radius=2.5, avoid=[0, 1, -1, 2], min_dist=0.3)
ZERO, ONE = RatFun(Poly([0])), RatFun(Poly([1]))


def rf(p):
    return RatFun(Poly(p))


def values(entries):
    return np.array([[e(PTS) for e in row] for row in entries])


def canon_values(oper):
    return np.array([v(PTS) for v in canonical_form(oper).coefficients])


def test_gauge_identity_and_example():
    a, b, x = rf([0, 0, 1]), rf([2, 1]), rf([0, 0, 0, 1])
    M = MatrixOper([[a, b], [rf([-1]), -a]])
    same = gauge_transform(M, [[ONE, ZERO], [ZERO, ONE]])
    assert np.allclose(values(same.entries), values(M.entries))
    G = gauge_transform(M, [[ONE, x], [ZERO, ONE]])
    want = [[a - x, b - a * x * 2 + x * x - x.deriv()], [rf([-1]), x - a]]
    assert np.allclose(values(G.entries), values(want))


def test_gauge_composition(rng):
    M = random_oper(rng, 3)
    g1, g2 = random_unipotent(rng, 3), random_unipotent(rng, 3)
    two_step = gauge_transform(gauge_transform(M, g1), g2)
    one_step = gauge_transform(M, mat_mul(g2, g1))
    assert np.allclose(values(two_step.entries), values(one_step.entries), rtol=1e-9, atol=1e-9)


def test_oper_shape_enforced():
    with pytest.raises(ValidationError):
        MatrixOper([[ZERO, ZERO], [ONE, ZERO]])
    with pytest.raises(ValidationError):
        gauge_transform(companion_oper([ZERO]), [[ONE, ZERO], [ONE, ONE]])


def test_canonical_form_example():
    M = MatrixOper([[rf([0, 1]), ZERO], [rf([-1]), rf([0, -1])]])
    v = canonical_form(M).coefficients
    assert np.allclose(v[0](PTS), -PTS ** 2 - 1)


def test_canonical_form_rejects_trace():
    with pytest.raises(ValidationError):
        canonical_form(MatrixOper([[ONE, ZERO], [rf([-1]), ZERO]]))


def test_canonical_gauge_is_explicit(rng):
    M = random_oper(rng, 3)
    can = canonical_form(M)
    G = gauge_transform(M, can.gauge)
    assert np.allclose(values(G.entries), values(can.matrix().entries), atol=1e-9)


@pytest.mark.parametrize("n", [2, 3])
def test_gauge_invariance_and_idempotence(rng, n):
    for _ in range(25):
        M = random_oper(rng, n)
        base = canon_values(M)
        moved = gauge_transform(M, random_unipotent(rng, n))
        assert np.allclose(canon_values(moved), base, rtol=1e-8, atol=1e-8)
        again = canonical_form(canonical_form(M).matrix())
        assert np.allclose(np.array([v(PTS) for v in again.coefficients]), base, rtol=1e-8, atol=1e-8)


def test_scalar_operator_is_gauge_invariant(rng):
    M = random_oper(rng, 3)
    L1 = scalar_operator(M)
    L2 = scalar_operator(gauge_transform(M, random_unipotent(rng, 3)))
    assert np.allclose(values([L1]), values([L2]), rtol=1e-8, atol=1e-8)
    # the companion form's scalar operator is d^3 + v_1 d + v_2
    can = canonical_form(M)
    assert np.allclose(L1[1](PTS), can.coefficients[0](PTS), rtol=1e-8, atol=1e-8)


@pytest.mark.parametrize("rank", [1, 2])
def test_cross_module_agreement(rng, rank):
    for _ in range(10):
        conn = random_connection(rng, rank)
        u = epsilon_coordinates(conn, rank + 1)
        can = canonical_form(diagonal_oper(u))
        oper = miura_scalar_oper(conn)
        for k in range(1, rank + 1):
            mine = can.coefficients[k - 1](PTS)
            theirs = oper.evaluate(k, PTS)
            assert np.allclose(mine, theirs, rtol=1e-8, atol=1e-8)


# -- Schwarzian and coordinate changes --------------------------------------------------

def exp_jet(center=0.0, order=14):
    return LocalJet(center, 0, [1 / factorial(k) for k in range(order + 1)], order)


def test_schwarzian_examples():
    assert abs(schwarzian(exp_jet(), 4).coeff(0) + 0.5) < 1e-12
    affine = LocalJet(0.3, 0, [1.0, 2.5], 10)
    assert np.allclose(schwarzian(affine, 4).dense(0, 4), 0)
    mobius = local_jet(RatFun(Poly([1]), X), 1.0, 12)
    assert np.abs(schwarzian(mobius, 5).dense(0, 5)).max() < 1e-12
    square = LocalJet(1.0, 0, [1, 2, 1], 12)   # s^2 at s = 1
    assert np.isclose(schwarzian(square, 2).coeff(0), -1.5)


def test_schwarzian_general_mobius(rng):
    for _ in range(5):
        a, b, c = rng.normal(size=3) + 1j * rng.normal(size=3)
        # keep the pole -1/c at distance >= 2 from s0 so the jet is well conditioned
        c = 0.5 * c / max(1.0, abs(c))
        f = RatFun(Poly([b, a]), Poly([1.0, c]))
        s0 = 0.1 + 0.2j
        assert np.abs(schwarzian(local_jet(f, s0, 12), 6).dense(0, 6)).max() < 1e-12


def test_schwarzian_critical_point():
    with pytest.raises(NumericError):
        schwarzian(LocalJet(0.0, 0, [1.0, 0.0, 1.0], 10), 2)


@given(st.integers(0, 2 ** 31))
def test_schwarzian_cocycle(seed):
    rng = np.random.default_rng(seed)
    K, depth = 4, 12
    t0 = complex(*rng.normal(size=2))
    psi = LocalJet(0.0, 0, np.r_[t0, 1 + 0.3 * rng.normal(), 0.5 * rng.normal(size=depth - 1)], depth)
    phi = LocalJet(t0, 0, np.r_[rng.normal(), 1 + 0.3 * rng.normal(), 0.5 * rng.normal(size=depth - 1)], depth)
    lhs = schwarzian(phi.compose(psi), K)
    d_psi = psi.deriv()
    rhs = (schwarzian(phi, K + 2).compose(psi) * d_psi * d_psi + schwarzian(psi, K + 2)).truncate(K)
    assert lhs.allclose(rhs, tol=1e-9)


def test_coordinate_change_examples():
    identity = LocalJet(0.5, 0, [0.5, 1.0], 12)
    v = [RatFun(Poly([0, 0, 1])), RatFun(Poly([1, 1]))]
    out = oper_coordinate_change(v, identity, 4)
    assert np.allclose(out[0].dense(0, 4), local_jet(v[0], 0.5, 4).dense(0, 4))
    assert np.allclose(out[1].dense(0, 4), local_jet(v[1], 0.5, 4).dense(0, 4))
    inv = local_jet(RatFun(Poly([1]), X), 1.0, 12)
    out = oper_coordinate_change([ZERO], inv, 4)
    assert np.abs(out[0].dense(0, 4)).max() < 1e-12
    square = LocalJet(1.0, 0, [1, 2, 1], 12)
    out = oper_coordinate_change([ZERO], square, 2)
    assert np.isclose(out[0].coeff(0), 0.75)
    with pytest.raises(NumericError):
        oper_coordinate_change([ZERO], LocalJet(0.0, 0, [1.0, 0.0, 1.0], 10), 2)


def test_rs_residue_examples():
    assert np.allclose(rs_residue([0, 0, 0]), [0.25, 0, 0])
    assert np.isclose(rs_residue([-0.25])[0], 0)
    # sl_2 site with pairing 1: c_1(0) = -(1/2)(3/2)
    assert np.isclose(rs_residue([-0.75])[0], -0.5)

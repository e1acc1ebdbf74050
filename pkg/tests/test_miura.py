from math import comb, factorial

import numpy as np
import pytest

from gaudin_opers.bethe import BetheProblem, multi_start_solve, residual, residue_at_infinity
from gaudin_opers.errors import ValidationError
from gaudin_opers.miura import (CartanConnection, connection_from_solution, epsilon_coordinates,
                                miura_scalar_oper, regularity_report,
                                residue_at_infinity_connection)
from gaudin_opers.ratfun import sample_points
from gaudin_opers.rootdata import load_cartan, rho

PTS = sample_points(10, np.random.default_rng(9), radius=3.0, avoid=[0, 1, 2, -1, 3], min_dist=0.3)


def terms_dict(conn):
    return {complex(p): r.tolist() for p, r in conn.terms}


def test_connection_from_solution_examples(two_site):
    conn = connection_from_solution(two_site, np.array([1.0]))
    assert terms_dict(conn) == {0j: [-1], 2 + 0j: [-1], 1 + 0j: [2]}
    empty = connection_from_solution(two_site.with_colors(()), np.zeros(0))
    assert terms_dict(empty) == {0j: [-1], 2 + 0j: [-1]}
    p = BetheProblem(load_cartan("A1"), ((0.0, [1]),), (1, 1))
    conn = connection_from_solution(p, np.array([1.0, -1.0]))
    assert terms_dict(conn) == {0j: [-1], 1 + 0j: [2], -1 + 0j: [2]}


def test_epsilon_coordinates():
    A1 = CartanConnection(load_cartan("A1"), ((0.0, [-1]), (1.0, [2])))
    u = epsilon_coordinates(A1, 2)
    d = A1.component(1)
    assert np.allclose(u[0](PTS), d(PTS) / 2) and np.allclose(u[1](PTS), -d(PTS) / 2)
    A2 = CartanConnection(load_cartan("A2"), ((0.0, [-1, 0]), (1.0, [2, -1]), (-2.0, [-1, 2])))
    u = epsilon_coordinates(A2, 3)
    d1, d2 = A2.component(1)(PTS), A2.component(2)(PTS)
    want = [(2 * d1 + d2) / 3, (-d1 + d2) / 3, (-d1 - 2 * d2) / 3]
    for got, w in zip(u, want):
        assert np.allclose(got(PTS), w, atol=1e-12)
    zero = epsilon_coordinates(CartanConnection(load_cartan("A2"), ()), 3)
    assert all(np.allclose(x(PTS), 0) for x in zero)
    with pytest.raises(ValidationError):
        epsilon_coordinates(A2, 2)


def test_miura_sl2_examples(two_site):
    zero = miura_scalar_oper(CartanConnection(load_cartan("A1"), ()))
    assert np.allclose(zero.coefficients[0](PTS), 0)
    # u_1 = 1/t means the alpha-component is 2/t
    flat = miura_scalar_oper(CartanConnection(load_cartan("A1"), ((0.0, [2]),)))
    assert np.allclose(flat.coefficients[0](PTS), 0, atol=1e-12)
    oper = miura_scalar_oper(connection_from_solution(two_site, np.array([1.0])))
    rep = regularity_report(oper, [0.0, 2.0, 1.0])
    assert np.isclose(rep[0].tails[0][-2], -0.75) and np.isclose(rep[1].tails[0][-2], -0.75)
    assert not rep[0].erased and rep[2].erased


def test_perturbed_root_is_not_erased(two_site):
    oper = miura_scalar_oper(connection_from_solution(two_site, np.array([1.1])))
    rep = regularity_report(oper, [1.1])[0]
    assert not rep.erased
    # for sl_2 the simple-pole coefficient at a root is the Bethe residual itself
    assert np.isclose(rep.simple_pole(), residual(two_site, [1.1])[0])


@pytest.mark.parametrize("p", [1, 2, 3])
def test_site_double_pole_coefficient(p):
    prob = BetheProblem(load_cartan("A1"), ((0.0, [p]), (1.0, [1])))
    oper = miura_scalar_oper(connection_from_solution(prob, np.zeros(0)))
    rep = regularity_report(oper, [0.0])[0]
    assert np.isclose(rep.tails[0][-2], -(p / 2) * (p / 2 + 1))


def test_residue_at_infinity_connection(two_site, rng):
    conn = connection_from_solution(two_site, np.array([1.0]))
    assert residue_at_infinity_connection(conn).tolist() == [2]
    empty = connection_from_solution(two_site.with_colors(()), np.zeros(0))
    assert residue_at_infinity_connection(empty).tolist() == [0]
    for _ in range(20):
        A = load_cartan(["A2", "B2", "C2"][rng.integers(3)])
        sites = tuple((complex(*rng.normal(size=2)) * 2, rng.integers(0, 3, size=2)) for _ in range(2))
        prob = BetheProblem(A, sites, tuple(rng.integers(1, 3, size=2)))
        sols = multi_start_solve(prob, 6, seed=int(rng.integers(1000)), max_iter=40)
        for s in sols:
            conn = connection_from_solution(prob, s.roots)
            assert np.array_equal(residue_at_infinity_connection(conn),
                                  2 * rho(A) - residue_at_infinity(prob))


def test_type_d_rejected():
    conn = CartanConnection(load_cartan("D4"), ())
    with pytest.raises(ValidationError):
        miura_scalar_oper(conn)


def _taylor_coefficients(oper, t0, K):
    """Taylor data of c_0..c_n (L = sum c_j d^j) at a regular point."""
    n = oper.order
    jets = oper.jets(t0, K)
    c = [np.zeros(K + 1, complex) for _ in range(n + 1)]
    c[n][0] = 1.0
    for k, jet in enumerate(jets, start=1):
        c[n - 1 - k] = np.array([jet.coeff(i) for i in range(K + 1)])
    return c


def _adjoint_at(c):
    """Value at t0 of the coefficients of L* = sum (-d)^j o c_j."""
    n = len(c) - 1
    out = np.zeros(n + 1, complex)
    for j in range(n + 1):
        for i in range(j + 1):
            # i-th derivative at t0 is i! times the Taylor coefficient
            out[j - i] += (-1) ** j * comb(j, i) * factorial(i) * c[j][i]
    return out


@pytest.mark.parametrize("label, sign", [("C2", 1), ("C3", 1), ("B2", -1), ("B3", -1)])
def test_bc_products_are_self_adjoint(label, sign):
    A = load_cartan(label)
    n = A.rank
    conn = CartanConnection(A, ((0.0, -np.eye(n, dtype=int)[0]), (1.5, A.entries[n - 1]),
                                (-1.0 + 1j, -np.ones(n, int))))
    oper = miura_scalar_oper(conn)
    for t0 in PTS[:5]:
        c = _taylor_coefficients(oper, complex(t0), oper.order + 1)
        values = np.array([cj[0] for cj in c])
        assert np.allclose(_adjoint_at(c), sign * values, atol=1e-9 * max(1, np.abs(values).max()))


@pytest.mark.parametrize("label", ["A2", "A3", "B2", "B3", "C2", "C3"])
def test_erasure_iff_bethe(label, rng):
    A = load_cartan(label)
    r = A.rank
    lams = [np.eye(r, dtype=int)[0], np.eye(r, dtype=int)[r - 1], np.ones(r, int)]
    sites = tuple(zip([0.0, 1.3 + 0.4j, -1.1 + 0.9j], lams))
    prob = BetheProblem(A, sites, tuple(range(1, r + 1)))
    sols = multi_start_solve(prob, 48, seed=2)
    assert sols
    for s in sols:
        oper = miura_scalar_oper(connection_from_solution(prob, s.roots))
        for rep in regularity_report(oper, s.roots, tol=1e-8):
            assert rep.erased, (label, rep.max_tail)
        bad = s.roots.copy()
        bad[0] += 1e-3
        oper = miura_scalar_oper(connection_from_solution(prob, bad))
        rep = regularity_report(oper, [bad[0]])[0]
        assert max(abs(rep.simple_pole(k)) for k in range(1, oper.order)) > 1e-5

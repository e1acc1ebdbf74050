import numpy as np
import pytest

from _problems import random_solved
from gaudin_opers.bethe import BetheProblem, residual
from gaudin_opers.errors import InfertileError, ValidationError
from gaudin_opers.miura import connection_from_solution
from gaudin_opers.ratfun import sample_points
from gaudin_opers.repro import (explore_population, master_integrand, reproduce,
                                riccati_gauge, tuple_from_solution)
from gaudin_opers.rootdata import load_cartan

PTS = sample_points(10, np.random.default_rng(4), avoid=[0, 1, -1, 2], min_dist=0.3)


@pytest.fixture
def single():
    return BetheProblem(load_cartan("A1"), ((0.0, [1]),))


def empty_tuple(problem):
    return tuple_from_solution(problem.with_colors(()), np.zeros(0))


def proportional(p, q, tol=1e-9):
    a, b = np.asarray(p.coef), np.asarray(q.coef)
    if a.size != b.size:
        return False
    k = np.argmax(np.abs(b))
    return np.allclose(a, b * (a[k] / b[k]), atol=tol * np.abs(a).max())


def test_tuple_from_solution(two_site):
    t = tuple_from_solution(two_site, np.array([1.0]))
    assert np.allclose(t.polys[0].coef, [-1, 1])
    p = BetheProblem(load_cartan("A1"), ((0.0, [1]),), (1, 1))
    assert np.allclose(tuple_from_solution(p, np.array([1.0, -1.0])).polys[0].coef, [-1, 0, 1])
    e = empty_tuple(two_site)
    assert e.degrees == (0,)


def test_master_integrand_examples(single, two_site):
    assert np.allclose(master_integrand(single, empty_tuple(single), 1)(PTS), PTS)
    t = tuple_from_solution(two_site, np.array([1.0]))
    assert np.allclose(master_integrand(two_site, t, 1)(PTS), PTS * (PTS - 2) / (PTS - 1) ** 2)
    a2 = BetheProblem(load_cartan("A2"), ((0.0, [1, 0]),))
    assert np.allclose(master_integrand(a2, empty_tuple(a2), 1)(PTS), PTS)


def test_reproduce_example(single):
    seed = empty_tuple(single)
    new = reproduce(single, seed, 1, -0.5)
    assert np.allclose(new.polys[0].coef, [-1, 0, 1])
    for c in [0.3, -1.2, 1j, 2 - 1j, 0.77]:
        new = reproduce(single, seed, 1, c)
        assert np.allclose(new.polys[0].coef, [2 * c, 0, 1])
        prob, roots = new.as_solution()
        assert np.abs(residual(prob, roots)).max() < 1e-10
        back = reproduce(single, new, 1, 0)
        assert proportional(back.polys[0], seed.polys[0])


def test_reproduce_infertile_tracks_bethe_residual(two_site):
    t = tuple_from_solution(two_site, np.array([0.9]))
    with pytest.raises(InfertileError) as info:
        reproduce(two_site, t, 1, 0.0)
    (p, rel), = info.value.relative
    assert np.isclose(p, 0.9) and np.isclose(abs(rel), abs(residual(two_site, [0.9])[0]))
    assert info.value.residues


def test_reproduce_bad_direction(single):
    with pytest.raises(ValidationError):
        reproduce(single, empty_tuple(single), 2, 0.0)


def test_riccati_example(single):
    conn = connection_from_solution(single, np.zeros(0))
    new, f = riccati_gauge(conn, 1, 0.0, c=-0.5)
    poles = sorted((complex(p).real, r.tolist()) for p, r in new.terms)
    assert poles == [(-1.0, [2]), (0.0, [-1]), (1.0, [2])]
    t = np.array([2.0, 3.0, 5.0])
    assert np.allclose(f(t), 2 * t / (t ** 2 - 1))
    u = conn.component(1)
    assert np.abs(f.deriv()(t) + f(t) ** 2 + f(t) * u(t)).max() < 1e-9


def test_riccati_identity_and_base_point(two_site):
    conn = connection_from_solution(two_site, np.array([1.0]))
    same, f = riccati_gauge(conn, 1, 0.0)
    assert same is conn and f.is_zero()
    new, f = riccati_gauge(conn, 1, 0.4 - 0.2j, base=0.5)
    assert np.isclose(f(np.array([0.5]))[0], 0.4 - 0.2j)
    roots = [p for p, r in new.terms if r[0] == 2]
    expected = connection_from_solution(two_site.with_colors((1, 1)), np.array(roots))
    got = {complex(p): r.tolist() for p, r in new.terms}
    assert got == {complex(p): r.tolist() for p, r in expected.terms}


def test_riccati_needs_c_when_integrand_vanishes(single):
    conn = connection_from_solution(single, np.zeros(0))
    with pytest.raises(ValidationError):
        riccati_gauge(conn, 1, 0.3)


def test_population_depths(single, two_site):
    seed = empty_tuple(single)
    pop0 = explore_population(single, seed, 0)
    assert len(pop0.nodes) == 1 and pop0.edges == []
    pop1 = explore_population(single, seed, 1)
    assert pop1.degree_classes() == [(0,), (2,)]
    labels = {n.tuple.degrees: (n.lam_inf.tolist(), n.word) for n in pop1.nodes}
    assert labels[(0,)] == ([1], ()) and labels[(2,)] == ([1], (1,))
    mid = tuple_from_solution(two_site, np.array([1.0]))
    pop = explore_population(two_site.with_colors(()), mid, 1)
    assert pop.degree_classes() == [(1,), (2,)]
    node = next(n for n in pop.nodes if n.tuple.degrees == (2,))
    assert node.mu_inf.tolist() == [-2] and node.word == (1,)


def test_population_infertile_seed(two_site):
    bad = tuple_from_solution(two_site, np.array([0.9]))
    pop = explore_population(two_site.with_colors(()), bad, 2)
    assert len(pop.nodes) == 1 and pop.skipped


def test_degenerate_tuples_flagged(single):
    pop = explore_population(single, empty_tuple(single), 1)
    # c = 0 gives y = x^2: a double root sitting on the site
    assert any(n.degenerate for n in pop.nodes)


def test_fertility_iff_bethe(rng):
    for prob, sol in random_solved(rng, ["A1", "A2", "B2", "C2"], 30):
        tup = tuple_from_solution(prob, sol)
        base = prob.with_colors(())
        for i in range(1, prob.rank + 1):
            reproduce(base, tup, i, 0.37)
        bad = sol.roots.copy()
        bad[0] += 1e-3 * (1 + 1j)
        i = prob.colors[0]
        with pytest.raises(InfertileError) as info:
            reproduce(base, tuple_from_solution(prob, bad), i, 0.37)
        rel = max(abs(r) for _, r in info.value.relative)
        res = np.abs(residual(prob, bad))[np.array(prob.colors) == i].max()
        assert res / 10 <= rel <= res * 10


def _pairing(tup, i):
    return int(tup.mu_inf()[i - 1])


def test_involution_and_flip_law(rng):
    cases = 0
    for prob, sol in random_solved(rng, ["A1", "A2", "B2"], 20):
        base = prob.with_colors(())
        tup = tuple_from_solution(prob, sol)
        i = int(rng.integers(1, prob.rank + 1))
        c = complex(*rng.normal(size=2))
        n = _pairing(tup, i)
        new = reproduce(base, tup, i, c)
        if new.is_degenerate():
            continue
        cases += 1
        if n >= 0:
            assert _pairing(new, i) == -n - 2
            c_back = 0.0
        else:
            assert new.degrees == tup.degrees
            # the primitive of the new integrand is -1/(F + c) + 1/c here
            c_back = -1 / c
        back = reproduce(base, new, i, c_back)
        assert proportional(back.polys[i - 1], tup.polys[i - 1])
        p2, r2 = new.as_solution()
        assert np.abs(residual(p2, r2)).max() < 1e-8
    assert cases >= 15


def test_population_edges_obey_flip_law(rng):
    for prob, sol in random_solved(rng, ["A1", "A2"], 4, max_roots=2):
        base = prob.with_colors(())
        pop = explore_population(base, tuple_from_solution(prob, sol), 2, c_samples=(0.0, 1.0, -0.6j))
        for node in pop.nodes:
            assert not np.any(node.mu_inf == -1)
        for e in pop.edges:
            src, dst = pop.nodes[e.source].tuple, pop.nodes[e.target].tuple
            n = _pairing(src, e.direction)
            if dst.degrees != src.degrees:
                assert _pairing(dst, e.direction) == -n - 2
            else:
                assert n < 0

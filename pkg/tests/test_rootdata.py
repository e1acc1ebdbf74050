import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaudin_opers.errors import NonTerminationError, ValidationError
from gaudin_opers.rootdata import (GeneralizedCartanMatrix, apply_w0, coroot, is_dominant,
                                   langlands_dual, load_cartan, longest_word, reduce_word,
                                   reflect, residue_to_weyl, rho, to_dominant, weyl_act)


def test_a2_matrix():
    A = load_cartan("A2")
    assert A.entries.tolist() == [[2, -1], [-1, 2]]
    assert A.rank == 2 and A.kind == "A2"


@pytest.mark.parametrize("label, entry", [("B2", (1, 0)), ("C2", (0, 1)), ("B3", (2, 1)), ("C3", (1, 2))])
def test_double_bond_position(label, entry):
    A = load_cartan(label)
    assert A.entries[entry] == -2


def test_g2_and_labels():
    assert load_cartan("G2").entries.tolist() == [[2, -3], [-1, 2]]
    assert load_cartan("B_3") == load_cartan(("B", 3)) == load_cartan("b", 3)


@pytest.mark.parametrize("label, size", [("A3", 6), ("B3", 9), ("D4", 12), ("E6", 36), ("F4", 24), ("G2", 6)])
def test_longest_word_length(label, size):
    A = load_cartan(label)
    w0 = longest_word(A)
    assert len(w0) == size
    assert np.array_equal(weyl_act(A, w0, rho(A)), -rho(A))


@pytest.mark.parametrize("bad", [[[2, 0], [-1, 2]], [[2, 1], [1, 2]], [[3, -1], [-1, 2]], [[2, -1, 0], [-1, 2, -1]]])
def test_invalid_matrices(bad):
    with pytest.raises(ValidationError):
        load_cartan(bad)


def test_bad_label():
    with pytest.raises(ValidationError):
        load_cartan("Q7")


def test_langlands_dual_swaps_b_and_c():
    assert langlands_dual("B3") == load_cartan("C3")
    assert langlands_dual("C3").kind == "B3"
    assert langlands_dual("A3") == load_cartan("A3")


def test_reflect_and_coroot():
    A = load_cartan("A1")
    assert reflect(A, 1, [1]).tolist() == [-1]
    assert coroot("A2", 1).tolist() == [2, -1]
    with pytest.raises(ValidationError):
        reflect(A, 2, [1])


def test_to_dominant_examples():
    A = load_cartan("A1")
    dom, word = to_dominant(A, [-3])
    assert dom.tolist() == [3] and word == (1,)
    dom, word = to_dominant(A, [2])
    assert dom.tolist() == [2] and word == ()


def test_to_dominant_nontermination_outside_tits_cone():
    hyper = load_cartan([[2, -3], [-3, 2]])
    with pytest.raises(NonTerminationError):
        to_dominant(hyper, [-1, -1], cap=200)


@pytest.mark.parametrize("label", ["A2", "B2", "C3", "G2", "A3"])
@given(data=st.data())
def test_to_dominant_property(label, data):
    A = load_cartan(label)
    mu = np.array(data.draw(st.lists(st.integers(-6, 6), min_size=A.rank, max_size=A.rank)))
    dom, word = to_dominant(A, mu)
    assert is_dominant(dom)
    assert np.array_equal(weyl_act(A, word, dom), mu)


@pytest.mark.parametrize("label", ["A2", "B2"])
def test_residue_to_weyl_round_trip(label):
    A = load_cartan(label)
    lam = np.array([1, 2])
    for k in range(5):
        for word in itertools.product(range(1, 3), repeat=k):
            r = rho(A) - weyl_act(A, word, lam + rho(A))
            y = residue_to_weyl(A, r, lam)
            assert y is not None
            assert np.array_equal(weyl_act(A, y, lam + rho(A)), weyl_act(A, word, lam + rho(A)))


def test_residue_to_weyl_none_when_orbit_differs():
    assert residue_to_weyl("A1", [5], [0]) is None


def test_reduce_word_and_w0():
    A = load_cartan("A2")
    assert reduce_word(A, (1, 1, 2)) == (2,)
    assert apply_w0(A, [1, 0]).tolist() == [0, -1]


def test_matrix_is_read_only_and_hashable():
    A = load_cartan("A2")
    with pytest.raises(ValueError):
        A.entries[0, 0] = 5
    assert len({A, load_cartan([[2, -1], [-1, 2]])}) == 1
    assert isinstance(A, GeneralizedCartanMatrix)


def test_residue_to_weyl_examples():
    assert residue_to_weyl("A1", [-2], [2]) == ()
    assert residue_to_weyl("A1", [4], [2]) == (1,)
    assert residue_to_weyl("A1", [-1], [2]) is None


def test_weyl_act_examples():
    A = load_cartan("A2")
    mu = np.array([3, -2])
    assert np.array_equal(weyl_act(A, (), mu), mu)
    assert np.array_equal(weyl_act(A, (1, 1), mu), mu)
    assert np.array_equal(weyl_act(A, (1, 2), rho(A)), reflect(A, 1, reflect(A, 2, rho(A))))


def test_a2_orbit_of_minus_rho_exhaustive():
    A = load_cartan("A2")
    dom, word = to_dominant(A, [-1, -1])
    orbit = {tuple(weyl_act(A, w, [1, 1])) for k in range(4) for w in itertools.product((1, 2), repeat=k)}
    assert len(orbit) == 6 and (-1, -1) in orbit
    assert dom.tolist() == [1, 1] and np.array_equal(weyl_act(A, word, dom), [-1, -1])

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szego_lab.errors import ConfigError
from szego_lab.gram import (DilationVector, gram_bounds_check, gram_matrix, lift_symbol,
                            log_mean_abs_sq, quadrature_gram)
from szego_lab.indexing import IndexSet, folner_box, multiplicative_folner
from szego_lab.spectral import geometric_mean_det
from szego_lab.toeplitz import assemble_multiplicative

E1 = DilationVector("power", {1: 1.0})
E1_HALF_E2 = DilationVector("power", {1: 1.0, 2: 0.5})

vectors = st.builds(
    lambda seed, basis, top, terms: DilationVector.random(
        np.random.default_rng(seed), max_index=top, terms=min(terms, top), basis=basis),
    st.integers(0, 10**6), st.sampled_from(["power", "sine"]), st.integers(1, 40),
    st.integers(1, 6))
index_sets = st.lists(st.integers(1, 200), min_size=1, max_size=20, unique=True).map(
    IndexSet.multiplicative)


# -- the lift |Uh|^2 ---------------------------------------------------------

def test_lift_examples():
    assert lift_symbol(E1).coefficients == {(): 1.0}
    c = 0.5
    s = lift_symbol(E1_HALF_E2)
    assert s.coeff(()) == pytest.approx(1 + c * c)
    assert s.coeff((1,)) == pytest.approx(c) and s.coeff((-1,)) == pytest.approx(c)
    s2 = lift_symbol(DilationVector("power", {2: 1.0, 3: 1.0}))
    assert s2.coeff(()) == 2 and s2.coeff((-1, 1)) == 1 and s2.coeff((1, -1)) == 1


# -- Gram matrices -------------------------------------------------------------

def test_gram_examples():
    assert np.array_equal(gram_matrix(E1, IndexSet.natural(7)), np.eye(7))
    g = gram_matrix(E1_HALF_E2, IndexSet.multiplicative([1, 2, 4]))
    assert np.allclose(g, [[1.25, 0.5, 0], [0.5, 1.25, 0.5], [0, 0.5, 1.25]])
    assert np.array_equal(gram_matrix(DilationVector("power", {2: 1.0}),
                                      IndexSet.multiplicative([1, 2, 3])), np.eye(3))


@given(vectors, index_sets)
def test_gram_is_toeplitz_of_lift(table, h, sigma):
    direct = gram_matrix(h, sigma, table)
    fourier = assemble_multiplicative(lift_symbol(h, table), sigma, table)
    assert np.max(np.abs(direct - fourier)) <= 1e-12


@pytest.mark.parametrize("basis", ["power", "sine"])
@pytest.mark.parametrize("seed", range(4))
def test_gram_matches_quadrature(basis, seed):
    rng = np.random.default_rng(seed)
    h = DilationVector.random(rng, max_index=12, terms=3, basis=basis)
    sigma = IndexSet.multiplicative([1, 2, 3, 5, 6, 10])
    assert np.allclose(gram_matrix(h, sigma), quadrature_gram(h, sigma), atol=1e-12)


def test_gram_rejects_additive_sets():
    with pytest.raises(ValueError):
        gram_matrix(E1, folner_box(1, 3))


# -- determinant bounds ------------------------------------------------------------

def test_bounds_for_e1():
    b, converged = gram_bounds_check(E1, IndexSet.natural(16))
    assert converged and b.lower == pytest.approx(1.0) and b.middle == pytest.approx(1.0)
    assert b.upper == 1.0


def test_bounds_for_outer_factor():
    b, converged = gram_bounds_check(E1_HALF_E2, IndexSet.natural(50))
    # |1 + z/2|^2 is outer: int log = log |1|^2 = 0
    assert converged and b.lower == pytest.approx(1.0, abs=1e-10)
    assert b.upper == pytest.approx(1.25)
    assert b.passed


def test_outer_factor_quadrature_oracle():
    t = 2 * np.pi * np.arange(4096) / 4096
    oracle = np.mean(np.log(np.abs(1 + 0.5 * np.exp(1j * t)) ** 2))
    value, converged = log_mean_abs_sq(E1_HALF_E2)
    assert converged and value == pytest.approx(oracle, abs=1e-12)


def test_folner_geometric_mean_tends_to_one():
    values = [geometric_mean_det(gram_matrix(E1_HALF_E2, multiplicative_folner(1, M)))
              for M in (1, 3, 9)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(1.0, abs=0.03)


@given(vectors, index_sets)
def test_gram_bounds_property(h, sigma):
    b, converged = gram_bounds_check(h, sigma)
    assert b.middle <= b.upper + b.slack
    if converged:
        assert b.passed


def test_vanishing_lift_is_floored_and_flagged():
    h = DilationVector("power", {1: 1.0, 2: -1.0})
    value, converged = log_mean_abs_sq(h, max_points=2**14)
    assert not converged
    assert math.isfinite(value)


# -- JSON ------------------------------------------------------------------------

@given(vectors)
def test_json_round_trip(h):
    assert DilationVector.from_json(h.to_json()) == h


@pytest.mark.parametrize("text", [
    '{"basis": "cosine", "coeffs": []}',
    '{"basis": "power", "coeffs": [{"n": 0, "re": 1}]}',
    '{"basis": "power", "coeffs": [{"n": 1, "re": 1}, {"n": 1, "re": 2}]}',
    '{"basis": "power"}',
    '{"basis": "power", "coeffs": [',
])
def test_malformed_vector_json(text):
    with pytest.raises(ConfigError):
        DilationVector.from_json(text)

import csv
import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szego_lab.errors import CapacityError
from szego_lab.indexing import IndexSet, factorize, folner_box
from szego_lab.symbol import Symbol
from szego_lab.toeplitz import (assemble, assemble_additive, assemble_multiplicative,
                                check_hermitian, dump_csv, hs_norm_sq, is_hermitian)

COS = Symbol.cosine(2.0, 1.0)


def loop_multiplicative(s, labels, table):
    """Oracle: entry (i, j) is coeff(label(j) - label(i)), one factorisation per entry."""
    n = len(labels)
    out = np.zeros((n, n), dtype=complex)
    for a, i in enumerate(labels):
        for b, j in enumerate(labels):
            q = Fraction(j, i)
            out[a, b] = s.coeff(factorize(q.numerator, table) - factorize(q.denominator, table))
    return out


def test_additive_tridiagonal_example():
    m = assemble_additive(COS, IndexSet.additive([(0,), (1,), (2,)]))
    assert np.array_equal(m, [[2, 0.5, 0], [0.5, 2, 0.5], [0, 0.5, 2]])


def test_constant_gives_scaled_identity():
    c = 1.75
    assert np.array_equal(assemble_additive(Symbol.constant(c), folner_box(2, 3)), c * np.eye(9))
    assert np.array_equal(assemble_multiplicative(Symbol.constant(c), IndexSet.natural(12)),
                          c * np.eye(12))


@pytest.mark.parametrize("N", [1, 2, 5, 9, 40])
def test_determinant_of_one_plus_z_squared(N):
    # |1 + z|^2 = 2 + z + 1/z; D_N = 2 D_{N-1} - D_{N-2}, D_0 = 1, D_1 = 2
    d = [1, 2]
    for _ in range(N - 1):
        d.append(2 * d[-1] - d[-2])
    assert d[N] == N + 1
    m = assemble_additive(Symbol({(): 2.0, (1,): 1.0}), folner_box(1, N))
    assert np.linalg.det(m) == pytest.approx(N + 1, rel=1e-10)


def test_multiplicative_example():
    m = assemble_multiplicative(COS, IndexSet.multiplicative([1, 2, 3]))
    assert np.array_equal(m, [[2, 0.5, 0], [0.5, 2, 0], [0, 0, 2]])


def test_powers_of_two_embed_the_additive_case():
    mult = assemble_multiplicative(COS, IndexSet.multiplicative([1, 2, 4, 8]))
    add = assemble_additive(COS, folner_box(1, 4))
    assert np.array_equal(mult, add)


@given(st.integers(0, 10**6), st.integers(1, 3), st.integers(1, 3),
       st.lists(st.integers(1, 400), min_size=1, max_size=25, unique=True))
def test_multiplicative_matches_loop_oracle(table, seed, k, bw, labels):
    s = Symbol.random(np.random.default_rng(seed), k, bw) + Symbol.constant(1.0)
    labels = sorted(labels)
    m = assemble_multiplicative(s, IndexSet.multiplicative(labels), table)
    assert np.array_equal(m.astype(complex), loop_multiplicative(s, labels, table))


@given(st.integers(0, 10**6), st.integers(1, 2), st.integers(1, 3))
def test_truncations_are_hermitian(table, seed, k, bw):
    rng = np.random.default_rng(seed)
    s = Symbol.random(rng, k, bw)
    assert is_hermitian(assemble(s, folner_box(k, 5), table))
    assert is_hermitian(assemble(s, IndexSet.natural(60), table))


def test_hs_norm_examples():
    assert hs_norm_sq(3.0 * np.eye(7)) == pytest.approx(63.0)
    assert hs_norm_sq(assemble_multiplicative(COS, IndexSet.multiplicative([1, 2, 3]))) == 12.5
    assert hs_norm_sq(np.zeros((4, 4))) == 0.0


def test_real_symbols_give_real_matrices():
    assert assemble_additive(COS, folner_box(1, 3)).dtype == np.float64
    cplx = Symbol({(1,): 0.5j, (): 1.0})
    assert assemble_additive(cplx, folner_box(1, 3)).dtype == np.complex128


def test_frequencies_outside_the_box_dimension_are_ignored():
    s = Symbol({(0, 1): 1.0, (): 3.0})
    assert np.array_equal(assemble_additive(s, folner_box(1, 4)), 3.0 * np.eye(4))


def test_dimension_cap():
    with pytest.raises(CapacityError):
        assemble_multiplicative(COS, IndexSet.natural(50), max_size=10)


def test_mode_mismatch_rejected():
    with pytest.raises(ValueError):
        assemble_additive(COS, IndexSet.natural(3))
    with pytest.raises(ValueError):
        assemble_multiplicative(COS, folner_box(1, 3))


def test_check_hermitian_rejects_asymmetric():
    with pytest.raises(ValueError):
        check_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_csv_dump():
    m = np.array([[2.0, 0.5j], [-0.5j, 2.0]])
    text = dump_csv(m)
    assert text.startswith("row,col,re,im\r\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == 5
    rebuilt = np.zeros((2, 2), dtype=complex)
    for r, c, re, im in rows[1:]:
        rebuilt[int(r), int(c)] = complex(float(re), float(im))
    assert np.array_equal(rebuilt, m)
    assert len(dump_csv(np.eye(3), nonzero_only=True).splitlines()) == 4

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szego_lab.errors import DomainError
from szego_lab.indexing import IndexSet, folner_box, multiplicative_folner
from szego_lab.spectral import (MomentReport, clamp_limit_experiment, eigen_residuals,
                                eigenvalues, folner_limit_experiment, geometric_mean_det,
                                geometric_mean_symbol, logdet, ratio_trace_experiment,
                                szego_bounds_check, trace_f, trace_power, tridiagonal_spectrum)
from szego_lab.symbol import Symbol, integrate, l1_norm
from szego_lab.toeplitz import assemble_additive, assemble_multiplicative

COS = Symbol.cosine(2.0, 1.0)
TARGET = (2 + math.sqrt(3)) / 2


def recurrence_det(a, b, n):
    """Oracle: D_n = a D_{n-1} - b^2 D_{n-2} for the tridiagonal (a, b) matrix."""
    d0, d1 = 1.0, a
    for _ in range(n - 1):
        d0, d1 = d1, a * d1 - b * b * d0
    return d1 if n else d0


# -- spectra -------------------------------------------------------------------

def test_spectrum_examples():
    assert np.array_equal(eigenvalues(2.5 * np.eye(6)).eigenvalues, np.full(6, 2.5))
    assert np.allclose(eigenvalues(np.diag([3.0, 1.0, 2.0])).eigenvalues, [1, 2, 3])


@pytest.mark.parametrize("n", [1, 7, 64, 300])
def test_tridiagonal_spectrum_closed_form(n):
    lam = eigenvalues(assemble_additive(COS, folner_box(1, n))).eigenvalues
    closed = np.sort(2 + np.cos(np.arange(1, n + 1) * np.pi / (n + 1)))
    assert np.allclose(lam, closed, atol=1e-12)
    assert np.allclose(np.sort(tridiagonal_spectrum(2.0, 0.5, n)), closed, atol=1e-14)


def test_eigen_residuals_small():
    m = assemble_multiplicative(COS, IndexSet.natural(200))
    assert np.max(eigen_residuals(m)) < 1e-12


# -- determinants ----------------------------------------------------------------

def test_geometric_mean_examples():
    assert geometric_mean_det(3.0 * np.eye(11)) == 3.0
    one_plus_z = Symbol({(): 2.0, (1,): 1.0})
    m = assemble_additive(one_plus_z, folner_box(1, 9))
    assert math.exp(logdet(m)) == pytest.approx(10.0, rel=1e-12)
    assert geometric_mean_det(m) == pytest.approx(10 ** (1 / 9), rel=1e-12)
    m3 = assemble_additive(COS, folner_box(1, 3))
    assert math.exp(logdet(m3)) == pytest.approx(7.0, rel=1e-12)
    assert geometric_mean_det(m3) == pytest.approx(7 ** (1 / 3), rel=1e-12)


@pytest.mark.parametrize("n", [2, 10, 100, 512])
def test_logdet_against_recurrence(n):
    m = assemble_additive(COS, folner_box(1, n))
    assert logdet(m) == pytest.approx(math.log(recurrence_det(2.0, 0.5, n)), rel=1e-12)


def test_logdet_rejects_indefinite():
    with pytest.raises(DomainError):
        logdet(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert geometric_mean_det(np.array([[1.0, 2.0], [2.0, 1.0]]), zero_if_singular=True) == 0.0


# -- traces ----------------------------------------------------------------------

def test_trace_examples():
    m = assemble_multiplicative(COS, IndexSet.natural(50))
    assert trace_f(m, lambda v: np.ones_like(v)) == pytest.approx(1.0)
    assert trace_f(m, "identity") == pytest.approx(2.0, abs=1e-13)


def test_second_moment_at_256():
    m = assemble_additive(COS, folner_box(1, 256))
    assert trace_f(m, "square") == pytest.approx(4.5, rel=1e-2)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_trace_power_matches_eigenvalues(p):
    m = assemble_multiplicative(COS, IndexSet.natural(64))
    lam = eigenvalues(m).eigenvalues
    assert trace_power(m, p) == pytest.approx(np.mean(lam**p), rel=1e-12)


@pytest.mark.parametrize("power", [2, 3, 4])
def test_moment_gap_decays_like_one_over_L(power):
    phi = Symbol({(): 2.0, (1,): 0.4, (2,): 0.3 - 0.1j})
    exact = integrate(phi, power)
    gaps = [abs(trace_power(assemble_additive(phi, folner_box(1, L)), power) - exact)
            for L in (32, 64, 128, 256)]
    # boundary effect: L * gap settles to a constant
    scaled = [L * g for L, g in zip((32, 64, 128, 256), gaps)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert scaled[-1] == pytest.approx(scaled[-2], rel=0.05)


# -- the sandwich ------------------------------------------------------------------

def test_bounds_constant():
    b = szego_bounds_check(Symbol.constant(2.5), IndexSet.natural(9))
    assert b.lower == pytest.approx(2.5) and b.middle == 2.5 and b.upper == 2.5 and b.passed


def test_bounds_examples():
    add = szego_bounds_check(COS, IndexSet.additive([(0,), (3,), (17,)]))
    assert add.lower == pytest.approx(1.8660254, abs=1e-7) and add.upper == pytest.approx(2.0)
    assert add.passed
    # three far-apart points: no coefficient reaches, the matrix is 2 I
    assert add.middle == pytest.approx(2.0)
    mult = szego_bounds_check(COS, IndexSet.multiplicative([1, 2, 3, 5, 30]))
    direct = np.linalg.det(assemble_multiplicative(COS, IndexSet.multiplicative([1, 2, 3, 5, 30])))
    assert mult.middle == pytest.approx(direct ** (1 / 5), rel=1e-12)
    assert mult.passed


def test_bounds_flag_nan():
    from szego_lab.spectral import SzegoBounds
    assert not SzegoBounds(math.nan, 1.0, 2.0, 1e-9).passed


@given(st.integers(0, 10**6), st.integers(1, 2), st.integers(1, 3),
       st.sampled_from(["additive", "multiplicative"]), st.integers(1, 30))
def test_sandwich_property(table, seed, k, bw, mode, size):
    rng = np.random.default_rng(seed)
    phi = Symbol.random_positive(rng, variables=k, bandwidth=bw)
    if mode == "additive":
        pts = {tuple(int(v) for v in rng.integers(-8, 9, size=k)) for _ in range(size)}
        sigma = IndexSet.additive(pts)
    else:
        sigma = IndexSet.multiplicative(rng.choice(np.arange(1, 300), size=size, replace=False))
    b = szego_bounds_check(phi, sigma, table)
    assert b.passed
    assert b.upper == pytest.approx(l1_norm(phi))


# -- limit experiments ---------------------------------------------------------------

def test_folner_determinant_limit():
    rep = folner_limit_experiment(COS, [folner_box(1, L) for L in (16, 64, 256, 512)])
    assert rep.reference == pytest.approx(TARGET, abs=1e-12)
    assert rep.final_gap <= 5e-3
    assert all(a >= b for a, b in zip(rep.gaps, rep.gaps[1:]))
    for (L, v) in rep.rows:
        assert v == pytest.approx(recurrence_det(2.0, 0.5, L) ** (1 / L), rel=1e-10)


def test_constant_symbol_gap_exactly_zero():
    rep = folner_limit_experiment(Symbol.constant(3.0), [folner_box(1, L) for L in (4, 16, 64)])
    assert rep.gaps == [0.0, 0.0, 0.0]


def test_multiplicative_folner_second_moment():
    # {2^0..2^M} carries the (M+1) x (M+1) tridiagonal (2, 1/2) matrix, so
    # Tr T^2 / (M+1) = 4 + 2 M / (4 (M+1)) = 4.5 - 0.5 / (M+1) exactly
    sizes = (3, 9, 15, 20)
    rep = folner_limit_experiment(COS, [multiplicative_folner(1, M) for M in sizes], f="square")
    assert rep.reference == pytest.approx(4.5)
    for M, gap in zip(sizes, rep.gaps):
        assert gap == pytest.approx(0.5 / (M + 1), abs=1e-12)
    assert rep.rows[1][1] == pytest.approx(4.45, abs=1e-12)


def test_geometric_mean_symbol_two_variables():
    # log(2 + cos a + cos b) has no elementary closed form; compare with an independent grid
    phi = Symbol.cosine(3.0, 1.0) + Symbol.cosine(0.0, 1.0, variable=1)
    t = 2 * np.pi * np.arange(512) / 512
    oracle = math.exp(np.mean(np.log(3 + np.cos(t)[:, None] + np.cos(t)[None, :])))
    assert geometric_mean_symbol(phi) == pytest.approx(oracle, rel=1e-10)


def test_clamp_identity_above_maximum():
    sigma = folner_box(1, 64)
    rep = clamp_limit_experiment(COS, [3.0, 4.0], sigma)
    base = geometric_mean_det(assemble_additive(COS, sigma))
    assert all(v == pytest.approx(base, rel=1e-12) for _, v in rep.rows)


def test_clamp_levels_nondecreasing():
    rep = clamp_limit_experiment(COS, [2.0, 2.5, 3.0], folner_box(1, 256))
    assert rep.extra["nondecreasing"]
    values = [v for _, v in rep.rows]
    assert values[0] < values[1] < values[2]
    for check in rep.extra["checks"]:
        assert check["eigenvalues_dominated"] and check["log_control"]


def test_clamped_constant():
    rep = clamp_limit_experiment(Symbol.constant(5.0), [3.0], folner_box(1, 10))
    assert rep.rows[0][1] == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("power", [1, 2])
def test_ratio_trace_limit(power):
    psi = Symbol({(): 1.0, (2,): 0.3})
    rep = ratio_trace_experiment(psi, COS, [folner_box(1, L) for L in (64, 256, 1024)], power)
    assert rep.final_gap < rep.gaps[0]
    assert rep.final_gap < 5e-3


def test_report_requires_increasing_sizes():
    with pytest.raises(ValueError):
        MomentReport("x", [(4, 1.0), (4, 1.0)], 1.0, "r")


def test_report_csv_columns():
    rep = MomentReport("x", [(2, 1.5), (4, 1.25)], 1.0, "r")
    lines = rep.to_csv().split("\r\n")
    assert lines[0] == "size,statistic,reference,gap"
    assert lines[1] == "2,1.5,1.0,0.5"
    assert rep.to_dict()["final_gap"] == 0.25

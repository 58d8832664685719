import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from szego_lab.errors import ConfigError, DomainError
from szego_lab.symbol import (GridSymbol, Symbol, certify_positive, clamp_min_max, evaluate,
                              from_grid, grid_range, integrate, l1_norm, l2_norm_sq, log_map,
                              mean_of, minimum, reciprocal_map, to_grid)

COS = Symbol.cosine(2.0, 1.0)


def direct_values(s, thetas):
    """Oracle: sum of coefficient times exponential, no FFT."""
    thetas = np.atleast_2d(thetas)
    out = np.zeros(thetas.shape[0], dtype=complex)
    for kappa, v in s.items():
        vec = np.zeros(thetas.shape[1])
        vec[:len(kappa)] = kappa
        out += v * np.exp(1j * thetas @ vec)
    return out.real


symbols = st.builds(
    lambda seed, k, bw: Symbol.random(np.random.default_rng(seed), k, bw)
    + Symbol.constant(float(np.random.default_rng(seed + 1).normal())),
    st.integers(0, 10**6), st.integers(1, 2), st.integers(0, 3))


# -- construction ------------------------------------------------------------

def test_mirror_is_filled_with_conjugate():
    s = Symbol({(1,): 0.5 + 0.25j})
    assert s.coeff((-1,)) == 0.5 - 0.25j


def test_non_conjugate_pair_rejected():
    with pytest.raises(ValueError):
        Symbol({(1,): 1.0, (-1,): 2.0})


def test_constant_term_must_be_real():
    with pytest.raises(ValueError):
        Symbol({(): 1j})


def test_variable_count_and_bandwidth():
    s = Symbol({(0, 0, 2): 1.0, (1,): 0.5})
    assert s.variable_count == 3
    assert s.active_axes() == (0, 2)
    assert s.bandwidth == 2


# -- evaluation --------------------------------------------------------------

def test_evaluate_examples():
    assert evaluate(Symbol.constant(7.5), (0.3,)) == 7.5
    assert evaluate(COS, (0.0,)) == pytest.approx(3.0)
    assert evaluate(COS, (math.pi / 2,)) == pytest.approx(2.0)


@given(symbols, st.lists(st.floats(-4, 4), min_size=2, max_size=2))
def test_evaluate_matches_direct_sum(s, point):
    assert evaluate(s, point) == pytest.approx(direct_values(s, np.array(point))[0], abs=1e-12)


# -- grids -------------------------------------------------------------------

def test_grid_round_trip_example():
    back = from_grid(to_grid(COS, 8))
    assert max(abs(back.coeff(k) - COS.coeff(k)) for k in [(), (1,), (-1,), (2,)]) < 1e-12


def test_constant_grid_is_constant():
    g = to_grid(Symbol.constant(5.0), 2)
    assert np.all(g.values == 5.0)


def test_aliasing_resolution_rejected():
    with pytest.raises(ValueError):
        to_grid(COS, 2)


@given(symbols, st.integers(0, 4))
def test_grid_round_trip_property(s, extra):
    R = 2 * s.bandwidth + 1 + extra
    back = from_grid(to_grid(s, R), drop_below=0.0)
    keys = set(s.support()) | set(back.support())
    assert all(abs(back.coeff(k) - s.coeff(k)) < 1e-12 for k in keys)


@given(symbols)
def test_grid_values_match_direct_sum(s):
    axes = s.active_axes() or (0,)
    R = 2 * s.bandwidth + 3
    g = to_grid(s, R, axes)
    grids = np.meshgrid(*([2 * np.pi * np.arange(R) / R] * len(axes)), indexing="ij")
    pts = np.zeros((R ** len(axes), max(axes) + 1))
    for a, grid in zip(axes, grids):
        pts[:, a] = grid.ravel()
    assert np.allclose(g.values.ravel(), direct_values(s, pts), atol=1e-12)


def test_from_grid_truncates_to_nyquist_band():
    g = GridSymbol((0,), 6, np.arange(6.0))
    assert all(abs(v) <= 2 for k in from_grid(g).support() for v in k)


def test_grid_values_are_read_only():
    g = to_grid(COS, 8)
    with pytest.raises(ValueError):
        g.values[0] = 1.0


# -- pointwise maps ------------------------------------------------------------

def test_clamp_example():
    g = to_grid(COS, 16)
    clamped = clamp_min_max(g, upper=2.0)
    theta = 2 * np.pi * np.arange(16) / 16
    assert np.allclose(clamped.values, np.minimum(2 + np.cos(theta), 2.0), atol=1e-14)


def test_log_and_reciprocal_of_constants():
    assert np.allclose(log_map(to_grid(Symbol.constant(math.e), 1)).values, 1.0)
    assert np.allclose(reciprocal_map(to_grid(Symbol.constant(4.0), 1)).values, 0.25)


def test_log_of_non_positive_reports_minimum():
    with pytest.raises(DomainError, match="-2"):
        log_map(to_grid(Symbol.cosine(0.0, 2.0), 8))
    with pytest.raises(DomainError):
        reciprocal_map(to_grid(Symbol.cosine(1.0, 2.0), 8))


# -- integrals and norms ---------------------------------------------------------

def test_integral_of_square():
    assert integrate(COS, "square") == pytest.approx(4.5, abs=1e-12)
    assert integrate(COS, 2) == pytest.approx(4.5, abs=1e-12)
    assert integrate(COS, "power:2") == pytest.approx(4.5, abs=1e-12)


def test_integral_of_constant():
    assert integrate(Symbol.constant(3.25)) == 3.25


def test_log_integral_against_independent_quadrature():
    theta = 2 * np.pi * np.arange(2**16) / 2**16
    oracle = float(np.mean(np.log(2 + np.cos(theta))))
    closed = math.log((2 + math.sqrt(3)) / 2)
    value = integrate(COS, "log")
    assert value == pytest.approx(oracle, abs=1e-10)
    assert value == pytest.approx(closed, abs=1e-10)
    assert value == pytest.approx(0.6238107, abs=1e-7)


@pytest.mark.parametrize("a", [1.5, 2.0, 5.0])
def test_log_integral_closed_form(a):
    # int log(a + cos) = log((a + sqrt(a^2 - 1)) / 2)
    s = Symbol.cosine(a, 1.0)
    assert integrate(s, "log") == pytest.approx(math.log((a + math.sqrt(a * a - 1)) / 2), abs=1e-10)


def test_custom_table_statistic():
    table = {"x": [0.0, 10.0], "y": [0.0, 20.0]}
    assert integrate(COS, table) == pytest.approx(4.0)


def test_norm_examples():
    assert l1_norm(Symbol.constant(3.0)) == 3.0
    assert l2_norm_sq(COS) == pytest.approx(4.5)
    assert l1_norm(COS) == pytest.approx(2.0)


def test_l1_norm_of_sign_changing_symbol():
    # int |cos| = 2 / pi
    assert l1_norm(Symbol.cosine(0.0, 1.0)) == pytest.approx(2 / math.pi, abs=1e-8)


@given(symbols)
def test_parseval(s):
    g = to_grid(s, 2 * s.bandwidth + 1)
    assert mean_of("square", g) == pytest.approx(l2_norm_sq(s), rel=1e-12, abs=1e-12)


@given(symbols, symbols)
def test_product_is_convolution(s, t):
    R = 2 * (s.bandwidth + t.bandwidth) + 1
    axes = tuple(sorted(set(s.active_axes()) | set(t.active_axes()))) or (0,)
    lhs = to_grid(s * t, R, axes).values
    rhs = to_grid(s, R, axes).values * to_grid(t, R, axes).values
    assert np.allclose(lhs, rhs, atol=1e-10)


# -- positivity ------------------------------------------------------------------

@pytest.mark.parametrize("seed", range(20))
def test_random_positive_respects_margin(seed):
    rng = np.random.default_rng(seed)
    s = Symbol.random_positive(rng, variables=1 + seed % 2, bandwidth=3, margin=0.01)
    fine, _ = grid_range(s, oversample=40)
    assert fine >= 0.01 - 1e-9
    assert minimum(s) == pytest.approx(0.01, abs=1e-9)


def test_certify_positive():
    assert certify_positive(COS) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        certify_positive(Symbol.cosine(1.0, 1.0))


def test_minimum_finds_dip_between_grid_points():
    # a narrow dip that a coarse grid misses: min of cos(3 theta + 0.1) is -1
    s = Symbol({(3,): 0.5 * complex(math.cos(0.1), math.sin(0.1))})
    assert minimum(s) == pytest.approx(-1.0, abs=1e-12)


# -- JSON ------------------------------------------------------------------------

def test_json_stores_one_of_each_pair():
    data = json.loads(COS.to_json())
    assert data == {"k": 1, "coeffs": [{"kappa": [], "re": 2.0, "im": 0.0},
                                       {"kappa": [1], "re": 0.5, "im": 0.0}]}


@given(symbols)
def test_json_round_trip(s):
    assert Symbol.from_json(s.to_json()) == s


@pytest.mark.parametrize("text", [
    "[1, 2]",
    '{"k": 1}',
    '{"k": 1, "coeffs": [{"kappa": ["a"], "re": 1}]}',
    '{"k": 1, "coeffs": [{"kappa": [1, 1], "re": 1}]}',
    '{"k": 1, "coeffs": [{"kappa": [1], "re": 1}, {"kappa": [1], "re": 2}]}',
    '{"k": 1, "coeffs": [{"kappa": [1], "re": 1}, {"kappa": [-1], "re": 2}]}',
    '{"k": 1, "coeffs": [',
])
def test_malformed_json_rejected(text):
    with pytest.raises(ConfigError):
        Symbol.from_json(text)

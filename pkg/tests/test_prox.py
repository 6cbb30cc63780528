import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compdecon import prox
from compdecon.errors import ParameterError
from compdecon.prox import ProxParams


def grid_argmin(x, K, p, levels=(1e-2, 1e-4, 1e-6)):
    """Refined brute-force minimizer of K|u|^p + (u-x)^2/2 (test oracle)."""
    lo, hi = min(0.0, x) - 1e-2, max(0.0, x) + 1e-2
    best = 0.0
    for step in levels:
        grid = np.arange(lo, hi + step, step)
        vals = K * np.abs(grid) ** p + 0.5 * (grid - x) ** 2
        best = grid[np.argmin(vals)]
        lo, hi = best - 2 * step, best + 2 * step
    return best


def bisect_root(a, K, p, tol=1e-13):
    """Plain bisection on q + pKq^(p-1) = a over [0, a] (test oracle)."""
    lo, hi = 0.0, a
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid + p * K * mid ** (p - 1) - a > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_soft_threshold_value():
    assert prox.prox_lp_scalar(2.0, ProxParams(0.5, 1.0)) == 1.5


def test_quadratic_closed_form():
    assert prox.prox_lp_scalar(3.0, ProxParams(1.0, 2.0)) == pytest.approx(1.0, abs=1e-15)


def test_p_one_and_a_half_against_bisection():
    # q + 1.5 sqrt(q) = 2 -> sqrt(q) = (-1.5 + sqrt(10.25)) / 2
    expected = ((-1.5 + math.sqrt(10.25)) / 2) ** 2
    assert expected == pytest.approx(bisect_root(2.0, 1.0, 1.5), abs=1e-12)
    got = prox.prox_lp_scalar(2.0, ProxParams(1.0, 1.5))
    assert got == pytest.approx(expected, abs=1e-12)
    assert got == pytest.approx(0.7238, abs=1e-4)
    assert prox.prox_lp_scalar(-2.0, ProxParams(1.0, 1.5)) == pytest.approx(-expected, abs=1e-12)


@pytest.mark.parametrize("p", [1.0, 1.3, 2.0])
def test_zero_maps_to_zero(p):
    assert prox.prox_lp_scalar(0.0, ProxParams(0.7, p)) == 0.0


def test_vector_is_elementwise(rng):
    v = rng.standard_normal(200) * 3
    for p in (1.0, 1.25, 1.8, 2.0):
        params = ProxParams(0.9, p)
        vec = prox.prox_lp_vector(v, params)
        scal = np.array([prox.prox_lp_scalar(t, params) for t in v])
        np.testing.assert_allclose(vec, scal, rtol=1e-12, atol=1e-15)
    np.testing.assert_array_equal(prox.prox_lp_vector(np.zeros(7), ProxParams(1.0, 1.5)), 0.0)


def test_vector_against_grid_oracle(rng):
    v = rng.uniform(-5, 5, 40)
    for p in (1.0, 1.2, 1.5, 1.9, 2.0):
        out = prox.prox_lp_vector(v, ProxParams(0.8, p))
        oracle = np.array([grid_argmin(t, 0.8, p) for t in v])
        assert np.max(np.abs(out - oracle)) < 1e-3


def test_prox_l1_examples():
    np.testing.assert_array_equal(prox.prox_l1(np.array([3.0, -0.2, 0.0]), 1.0), [2.0, 0.0, 0.0])
    v = np.array([1.0, -2.0, 0.3])
    np.testing.assert_array_equal(prox.prox_l1(v, 0.0), v)
    np.testing.assert_array_equal(prox.prox_l1(v, 0.4), prox.prox_lp_vector(v, ProxParams(0.4, 1.0)))


def test_parameter_validation():
    with pytest.raises(ParameterError):
        ProxParams(-0.1, 1.5)
    with pytest.raises(ParameterError):
        ProxParams(1.0, 0.9)
    with pytest.raises(ParameterError):
        ProxParams(1.0, 2.1)
    with pytest.raises(ParameterError):
        prox.prox_l1(np.ones(3), -1.0)


@pytest.mark.parametrize("x", [-7.0, -0.3, 0.05, 2.0, 9.5])
@pytest.mark.parametrize("K", [0.01, 0.5, 1.0])
def test_continuity_at_interval_ends(x, K):
    near_one = prox.prox_lp_scalar(x, ProxParams(K, 1.0 + 1e-9))
    assert near_one == pytest.approx(prox.prox_lp_scalar(x, ProxParams(K, 1.0)), abs=1e-8)
    near_two = prox.prox_lp_scalar(x, ProxParams(K, 2.0 - 1e-9))
    assert near_two == pytest.approx(prox.prox_lp_scalar(x, ProxParams(K, 2.0)), abs=1e-8)


@pytest.mark.parametrize("x", [-9.5, 7.0, 9.5])
@pytest.mark.parametrize("K", [2.0, 4.0, 5.0])
def test_continuity_first_order_for_large_weights(x, K):
    # the exact root moves by about K*d*(1 + ln q) when p = 1 + d, which
    # exceeds 1e-8 once K is a few units
    d = 1e-9
    q1 = abs(prox.prox_lp_scalar(x, ProxParams(K, 1.0)))
    shift = K * d * (1 + math.log(q1))
    got = abs(prox.prox_lp_scalar(x, ProxParams(K, 1.0 + d)))
    assert got == pytest.approx(q1 - shift, abs=1e-12)


finite = st.floats(-20, 20, allow_nan=False)
weights = st.floats(0, 5, allow_nan=False)
exponents = st.floats(1, 2, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(finite, finite, weights, exponents)
def test_shrinkage_monotone_nonexpansive(x1, x2, K, p):
    params = ProxParams(K, p)
    q1, q2 = prox.prox_lp_scalar(x1, params), prox.prox_lp_scalar(x2, params)
    assert abs(q1) <= abs(x1) + 1e-15
    assert q1 == 0.0 or np.sign(q1) == np.sign(x1)
    if abs(x1) <= abs(x2):
        assert abs(q1) <= abs(q2) + 1e-12
    assert abs(q1 - q2) <= abs(x1 - x2) + 1e-12


@settings(max_examples=100, deadline=None)
@given(finite, weights, exponents, st.integers(0, 2**31))
def test_optimality_against_random_candidates(x, K, p, seed):
    q = prox.prox_lp_scalar(x, ProxParams(K, p))
    u = np.random.default_rng(seed).uniform(-25, 25, 1000)
    assert prox.lp_penalty(q, x, K, p) <= np.min(prox.lp_penalty(u, x, K, p)) + 1e-9


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-3, 20), st.floats(1e-3, 5), st.floats(1.05, 1.999))
def test_defining_equation_residual(a, K, p):
    q = prox.prox_lp_scalar(a, ProxParams(K, p))
    assert q > 0
    assert abs(q + p * K * q ** (p - 1) - a) < 1e-10


def test_prox_curve_columns():
    xs = np.linspace(-3, 3, 13)
    curves = prox.prox_curve(xs, 1.0, [1.0, 1.5, 2.0])
    assert curves.shape == (13, 3)
    np.testing.assert_allclose(curves[:, 2], xs / 3.0)

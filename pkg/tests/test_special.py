"""Tests for the log-scale special functions."""

import math

import numpy as np
import pytest

from tensorlaplace.special import (
    MAX_ORDER,
    bessel_k_integral_oracle,
    log_bessel_k,
    log_gamma,
)

ORACLE_ORDERS = [0.0, 0.3, 1.0, 2.5, 7.0, 15.0]
ORACLE_ARGS = [1e-3, 0.1, 1.0, 5.0, 30.0]


def log_k_half(z):
    # K_{1/2}(z) = sqrt(pi / (2 z)) exp(-z)
    return 0.5 * math.log(math.pi / (2.0 * z)) - z


@pytest.mark.parametrize(
    "x, expected",
    [
        (1.0, 0.0),
        (5.0, math.log(24.0)),
        (0.5, math.log(math.sqrt(math.pi))),
    ],
)
def test_log_gamma_known_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, rel=1e-13, abs=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_rejects_non_positive(x):
    with pytest.raises(ValueError):
        log_gamma(x)


def test_log_bessel_half_order_closed_form():
    assert log_bessel_k(0.5, 1.0) == pytest.approx(log_k_half(1.0), abs=1e-12)
    assert log_bessel_k(0.5, 1.0) == pytest.approx(-0.774209, abs=1e-6)
    for z in [1e-3, 0.2, 1.0, 7.0, 50.0, 400.0]:
        assert log_bessel_k(0.5, z) == pytest.approx(log_k_half(z), rel=1e-12)
        # K_{3/2}(z) = K_{1/2}(z) (1 + 1/z)
        expected = log_k_half(z) + math.log1p(1.0 / z)
        assert log_bessel_k(1.5, z) == pytest.approx(expected, rel=1e-12)


def test_log_bessel_order_zero_value():
    assert math.exp(log_bessel_k(0.0, 1.0)) == pytest.approx(0.4210244, abs=1e-7)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.3, 4.0, 17.2, 2000.0])
@pytest.mark.parametrize("z", [1e-3, 1.0, 42.0])
def test_log_bessel_even_in_order(nu, z):
    assert log_bessel_k(-nu, z) == log_bessel_k(nu, z)


@pytest.mark.parametrize("nu", ORACLE_ORDERS)
@pytest.mark.parametrize("z", ORACLE_ARGS)
def test_log_bessel_matches_integral_oracle(nu, z):
    mine = math.exp(log_bessel_k(nu, z))
    ref = bessel_k_integral_oracle(nu, z)
    assert mine == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("nu", [0.0, 0.7, 3.0, 25.5, 500.0])
def test_log_bessel_decreasing_in_argument(nu):
    grid = np.geomspace(1e-3, 200.0, 40)
    values = [log_bessel_k(nu, z) for z in grid]
    assert all(a > b for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("nu", [0.4, 1.0, 5.5, 30.0, 250.3])
@pytest.mark.parametrize("z", [0.05, 1.0, 12.0, 90.0])
def test_log_bessel_recurrence_residual(nu, z):
    # K_{nu+1} = K_{nu-1} + (2 nu / z) K_nu, checked in log space
    lk_minus = log_bessel_k(nu - 1.0, z)
    lk_mid = log_bessel_k(nu, z)
    lk_plus = log_bessel_k(nu + 1.0, z)
    rhs = np.logaddexp(lk_minus, math.log(2.0 * nu / z) + lk_mid)
    assert lk_plus == pytest.approx(rhs, rel=1e-8)


def test_log_bessel_finite_at_extreme_orders():
    value = log_bessel_k(MAX_ORDER, 1.0)
    assert math.isfinite(value)
    assert value > 1e4  # far beyond double overflow in linear scale


@pytest.mark.parametrize(
    "nu, z, expected",
    [
        # frozen from a 50-digit arbitrary-precision evaluation
        (0.5, 1e-120, 138.38089693228747),
        (3.7, 1e-150, 1281.2342963258727),
        (0.02, 1e-200, 12.431860641172015),
        (0.0, 1e-150, 5.845003339141161),
        (40.2, 1e-110, 10316.570181882877),
    ],
)
def test_log_bessel_tiny_argument_branch(nu, z, expected):
    assert log_bessel_k(nu, z) == pytest.approx(expected, rel=1e-10)


def test_log_bessel_domain_errors():
    with pytest.raises(ValueError):
        log_bessel_k(1.0, 0.0)
    with pytest.raises(ValueError):
        log_bessel_k(1.0, -2.0)
    with pytest.raises(ValueError):
        log_bessel_k(MAX_ORDER + 1.0, 1.0)


def test_oracle_half_order_closed_form():
    assert bessel_k_integral_oracle(0.5, 2.0) == pytest.approx(
        math.sqrt(math.pi / 4.0) * math.exp(-2.0), rel=1e-10
    )
    assert bessel_k_integral_oracle(0.5, 2.0) == pytest.approx(0.1199377, abs=1e-7)


def test_oracle_order_one_value():
    assert bessel_k_integral_oracle(1.0, 1.0) == pytest.approx(0.6019072, abs=1e-7)


def test_oracle_small_argument_asymptote():
    # K_nu(z) ~ Gamma(nu)/2 * (2/z)^nu for z -> 0
    value = bessel_k_integral_oracle(3.0, 0.5)
    asymptote = 0.5 * math.gamma(3.0) * (2.0 / 0.5) ** 3.0
    assert value > 10.0
    assert value == pytest.approx(asymptote, rel=0.05)


@pytest.mark.parametrize(
    "nu, z",
    [(0.5, 1e-4), (0.5, 100.0), (30.0, 1.0), (1.0, 0.0), (1.0, -1.0)],
)
def test_oracle_rejects_out_of_range(nu, z):
    with pytest.raises(ValueError):
        bessel_k_integral_oracle(nu, z)

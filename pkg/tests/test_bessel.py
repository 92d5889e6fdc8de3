import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nofastforward.bessel import (
    bessel_eval,
    bessel_j,
    bessel_j_grid,
    bessel_j_orders,
    kra_bound,
    kra_threshold,
    large_order_estimate,
    tail_bound,
)
from nofastforward.errors import DomainError

mpmath.mp.dps = 40


def series_oracle(n, x):
    """Power series summed in high precision."""
    x = mpmath.mpf(x)
    total = mpmath.mpf(0)
    m = 0
    while True:
        term = (-1) ** m * (x / 2) ** (2 * m + n) / (mpmath.factorial(m) * mpmath.factorial(m + n))
        total += term
        if m > 10 and abs(term) < mpmath.mpf(10) ** -35 * max(abs(total), mpmath.mpf(10) ** -300):
            return float(total)
        m += 1


def test_origin_values():
    assert bessel_j(0, 0) == 1.0
    assert bessel_j(3, 0) == 0.0


def test_j1_at_two_matches_series():
    assert bessel_j(1, 2.0) == pytest.approx(series_oracle(1, 2.0), rel=1e-14)


def test_random_points_match_mpmath():
    rng = np.random.default_rng(7)
    for _ in range(300):
        n = int(rng.integers(0, 201))
        x = float(rng.uniform(0, 500))
        ref = float(mpmath.besselj(n, x))
        got = bessel_j(n, x)
        if abs(ref) < 1e-2:
            assert abs(got - ref) <= 1e-14
        else:
            assert abs(got - ref) <= 1e-12 * abs(ref)


def test_grid_matches_scalar():
    xs = np.linspace(0, 30, 77)
    np.testing.assert_allclose(bessel_j_grid(5, xs), [bessel_j(5, x) for x in xs], atol=1e-15)


def test_orders_sweep_matches_scalar():
    vals = bessel_j_orders(60, 37.5)
    for k in (0, 1, 30, 60):
        assert vals[k] == pytest.approx(bessel_j(k, 37.5), abs=1e-15)


def test_eval_reports_small_residual():
    e = bessel_eval(10, 25.0)
    assert e.value == pytest.approx(float(mpmath.besselj(10, 25)), rel=1e-12)
    assert 0 <= e.abs_error_estimate < 1e-12


@pytest.mark.parametrize("n,x", [(201, 1.0), (-201, 1.0), (0, -0.1), (0, 500.5), (1.5, 2.0)])
def test_domain_errors(n, x):
    with pytest.raises(DomainError):
        bessel_j(n, x)


def test_tail_bound_values():
    assert tail_bound(1) == pytest.approx(0.63662, abs=1e-5)
    assert tail_bound(2) == pytest.approx(0.31831, abs=1e-5)
    assert tail_bound(100) == 2 / (100 * math.pi)
    with pytest.raises(DomainError):
        tail_bound(0)


def test_kra_bound_examples():
    b = kra_bound(3, 6.0)
    assert 0 < b < math.inf
    assert series_oracle(3, 6.0) ** 2 <= b
    assert series_oracle(10, 25.0) ** 2 <= kra_bound(10, 25.0)


def test_kra_bound_below_threshold_reports_threshold():
    with pytest.raises(DomainError) as exc:
        kra_bound(1, 0.1)
    assert exc.value.threshold == pytest.approx(kra_threshold(1))


def test_large_order_estimates():
    est = large_order_estimate(50, 0.5)
    ref = abs(float(mpmath.besselj(50, 25)))
    assert ref / 2 <= est <= 2 * ref
    assert 0 < large_order_estimate(100, 0.9) < 1
    assert large_order_estimate(120, 0.4) < 1e-12
    assert abs(bessel_j(120, 48.0)) < 1e-10


# -- properties -----------------------------------------------------------------


@given(st.integers(-200, 200), st.floats(0, 500))
def test_bounded_by_one(n, x):
    assert abs(bessel_j(n, x)) <= 1.0


@given(st.integers(0, 200), st.floats(0, 500))
def test_parity_exact(n, x):
    assert bessel_j(-n, x) == (-1) ** n * bessel_j(n, x)


def test_recurrence_residual_grid():
    xs = np.arange(1, 401) * 0.5
    for n in range(1, 100):
        lo, mid, hi = (bessel_j_grid(m, xs) for m in (n - 1, n, n + 1))
        assert np.max(np.abs(hi - (2 * n / xs) * mid + lo)) <= 1e-10


@given(st.integers(1, 100), st.floats(0, 1))
def test_tail_bound_holds(n, u):
    x = 2 * n + 2 * n * u
    assert bessel_j(n, x) ** 2 <= tail_bound(n) + 1e-12


@given(st.floats(0, 60), st.floats(1.0001, 3.0))
def test_kra_domination(n, scale):
    n = round(n)
    x = kra_threshold(n) * scale
    if x > 500:
        return
    assert bessel_j(n, x) ** 2 <= kra_bound(n, x) + 1e-12


@pytest.mark.parametrize("x", [5e-324, 1e-310])
def test_subnormal_argument(x):
    assert bessel_j(0, x) == 1.0
    assert bessel_j(-3, x) == 0.0 and bessel_j(5, x) == 0.0
    np.testing.assert_array_equal(bessel_j_grid(0, np.array([x, 0.0])), [1.0, 1.0])

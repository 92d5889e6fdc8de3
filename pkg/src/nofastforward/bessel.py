"""Integer-order Bessel functions of the first kind and the bounds used on them.

Evaluation uses the power series for x < 2 and a normalised backward (Miller)
recurrence otherwise; see :mod:`nofastforward._kernels` for the loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError

MAX_ORDER = 200
MAX_ARG = 500.0


@dataclass(frozen=True)
class BesselEval:
    order: int
    argument: float
    value: float
    abs_error_estimate: float


def _check(n, x):
    if int(n) != n:
        raise DomainError(f"order must be an integer, got {n!r}")
    if abs(n) > MAX_ORDER:
        raise DomainError(f"|n| = {abs(n)} exceeds the order cap {MAX_ORDER}")
    if not (0.0 <= x <= MAX_ARG):
        raise DomainError(f"x = {x} outside [0, {MAX_ARG}]")


def _parity(n):
    return -1.0 if (n < 0 and n % 2) else 1.0


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer |n| <= 200 and 0 <= x <= 500.

    Negative orders go through J_{-n}(x) = (-1)^n J_n(x).
    """
    _check(n, x)
    return _parity(n) * _kernels.jn_scalar(abs(int(n)), float(x))


def bessel_eval(n: int, x: float) -> BesselEval:
    """Like :func:`bessel_j`, with the recurrence's normalisation residual attached."""
    _check(n, x)
    m = abs(int(n))
    vals, residual = _kernels.jn_orders(m, float(x))
    return BesselEval(int(n), float(x), _parity(n) * float(vals[m]), float(residual))


def bessel_j_grid(n: int, xs) -> np.ndarray:
    """J_n over an array of arguments (same caps as :func:`bessel_j`)."""
    xs = np.asarray(xs, dtype=np.float64).ravel()
    if xs.size:
        _check(n, float(xs.min()))
        _check(n, float(xs.max()))
    return _parity(n) * _kernels.jn_many(abs(int(n)), xs)


def bessel_j_orders(nmax: int, x: float) -> np.ndarray:
    """J_0(x) .. J_nmax(x) from one recurrence sweep.

    No order cap: the image-sum propagator needs orders of a few times the
    line length, where the values underflow harmlessly to zero.
    """
    if nmax < 0:
        raise DomainError(f"nmax must be >= 0, got {nmax}")
    if x < 0:
        raise DomainError(f"x must be >= 0, got {x}")
    vals, _ = _kernels.jn_orders(int(nmax), float(x))
    return vals


def tail_bound(n: int) -> float:
    """Upper bound 2/(n pi) on J_n(x)^2, valid for x >= 2n."""
    if n <= 0:
        raise DomainError(f"n must be a positive integer, got {n}")
    return 2.0 / (n * math.pi)


def kra_threshold(n: float) -> float:
    mu = (2 * n + 1) * (2 * n + 3)
    return math.sqrt(mu + mu ** (2.0 / 3.0)) / 2.0


def kra_bound(n: float, x: float) -> float:
    """Krasikov's upper bound on J_n(x)^2.

    Valid for n > -1/2 and x above ``kra_threshold(n)``; otherwise a
    :class:`DomainError` carrying the threshold is raised.
    """
    if n <= -0.5:
        raise DomainError(f"n must exceed -1/2, got {n}")
    thr = kra_threshold(n)
    if not x > thr:
        err = DomainError(f"x = {x} must exceed the threshold {thr!r} for n = {n}")
        err.threshold = thr
        raise err
    mu = (2 * n + 1) * (2 * n + 3)
    num = 4.0 * (4.0 * x * x - (2 * n + 1) * (2 * n + 5))
    den = math.pi * ((4.0 * x * x - mu) ** 1.5 - mu)
    return num / den


def large_order_estimate(n: int, sech_xi: float) -> float:
    """Leading large-order asymptotic of J_n(n sech xi) for argument below the order."""
    if n <= 0:
        raise DomainError(f"n must be a positive integer, got {n}")
    if not (0.0 < sech_xi < 1.0):
        raise DomainError(f"sech_xi must lie in (0, 1), got {sech_xi}")
    xi = math.acosh(1.0 / sech_xi)
    th = math.tanh(xi)
    return math.exp(-n * (xi - th)) / math.sqrt(2.0 * math.pi * n * th)

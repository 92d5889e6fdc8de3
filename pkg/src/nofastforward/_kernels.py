"""Hot numeric loops, each in a numba and a pure-numpy flavour.

The numba versions are compiled with ``@njit`` on first use. Setting the
environment variable ``NOFASTFORWARD_PURE_NUMPY=1`` (or running without numba
installed) binds the public names to the numpy versions instead. Both
flavours are always importable as ``NUMBA_KERNELS`` / ``NUMPY_KERNELS`` so the
benchmark and the equivalence tests can drive them side by side.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    HAS_NUMBA = False

_PURE_NUMPY = os.environ.get("NOFASTFORWARD_PURE_NUMPY", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

# Rescale point for the backward recurrence: keeps bj**2 finite, since the
# per-step growth 2k/x stays far below 1e50.
_BIG = 1e100
_SMALL = 1e-100
SERIES_CUTOFF = 2.0


def miller_start(n, x):
    """Start order for the backward recurrence, always >= n + 20 + ceil(x)."""
    m = n + 2 * int(math.ceil(x)) + 20
    return m + (m & 1)


# ---------------------------------------------------------------------------
# Bessel J_n, scalar building blocks (plain Python, jit-compatible)
# ---------------------------------------------------------------------------


def _jn_series_py(n, x):
    if x == 0.0:
        return 1.0 if n == 0 else 0.0
    half = 0.5 * x
    if n == 0:
        term = 1.0
    elif half == 0.0:
        # subnormal x: (x/2)^n underflows for every n >= 1
        return 0.0
    else:
        log_t0 = n * math.log(half) - math.lgamma(n + 1.0)
        if log_t0 < -745.0:
            return 0.0
        term = math.exp(log_t0)
    total = term
    q = half * half
    m = 0
    while True:
        m += 1
        term *= -q / (m * (m + n))
        total += term
        if abs(term) <= 1e-17 * abs(total) or m > 200:
            break
    return total


def _jn_orders_py(nmax, x, out):
    """Fill out[0..nmax] with J_k(x), x >= SERIES_CUTOFF; return the residual.

    The residual is |J_0^2 + 2 sum_k J_k^2 - 1| over the computed orders.
    """
    for k in range(nmax + 1):
        out[k] = 0.0
    start = nmax + 2 * int(math.ceil(x)) + 20
    start += start & 1
    bjp1 = 0.0
    bj = 1.0
    norm = 0.0
    sq = 0.0
    for k in range(start, 0, -1):
        bjm1 = (2.0 * k / x) * bj - bjp1
        bjp1 = bj
        bj = bjm1
        idx = k - 1
        if idx <= nmax:
            out[idx] = bj
        if idx > 0:
            sq += 2.0 * bj * bj
            if (idx & 1) == 0:
                norm += 2.0 * bj
        if abs(bj) > _BIG:
            bj *= _SMALL
            bjp1 *= _SMALL
            norm *= _SMALL
            sq *= _SMALL * _SMALL
            lo = idx if idx <= nmax else nmax + 1
            for i in range(lo, nmax + 1):
                out[i] *= _SMALL
    norm += bj
    sq += bj * bj
    for k in range(nmax + 1):
        out[k] /= norm
    return abs(sq / (norm * norm) - 1.0)


def _jn_scalar_py(n, x):
    """J_n(x) for n >= 0, x >= 0."""
    if x < SERIES_CUTOFF:
        return _jn_series_py(n, x)
    start = miller_start(n, x)
    bjp1 = 0.0
    bj = 1.0
    norm = 0.0
    val = 0.0
    for k in range(start, 0, -1):
        bjm1 = (2.0 * k / x) * bj - bjp1
        bjp1 = bj
        bj = bjm1
        idx = k - 1
        if idx == n:
            val = bj
        if idx > 0 and (idx & 1) == 0:
            norm += 2.0 * bj
        if abs(bj) > _BIG:
            bj *= _SMALL
            bjp1 *= _SMALL
            norm *= _SMALL
            if idx <= n:
                val *= _SMALL
    norm += bj
    return val / norm


def _jn_many_py(n, xs):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = _jn_scalar_py(n, xs[i])
    return out


def _jn_orders_many_py(nmax, x):
    out = np.empty(nmax + 1)
    if x < SERIES_CUTOFF:
        for k in range(nmax + 1):
            out[k] = _jn_series_py(k, x)
        return out, 0.0
    res = _jn_orders_py(nmax, x, out)
    return out, res


# ---------------------------------------------------------------------------
# Line walk amplitudes
# ---------------------------------------------------------------------------


def _line_amplitudes_py(L, k, t):
    """<l|exp(-i H_L t)|k> for l = 1..L via the closed-form eigensystem."""
    out = np.zeros(L, dtype=np.complex128)
    period = 2 * (L + 1)
    scale = 2.0 / (L + 1)
    w = math.pi / (L + 1)
    for p in range(1, L + 1):
        lam = 2.0 * math.cos(p * w)
        vk = math.sin(((k * p) % period) * w)
        ph = complex(math.cos(lam * t), -math.sin(lam * t)) * (scale * vk)
        for l in range(1, L + 1):
            out[l - 1] += ph * math.sin(((l * p) % period) * w)
    return out


# ---------------------------------------------------------------------------
# Fisher-Yates and twisted chains
# ---------------------------------------------------------------------------


def _fisher_yates_py(draws):
    """Shuffle arange(N) with swap partners draws[i] in [0, i], i = N-1..1."""
    n = draws.shape[0]
    perm = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = draws[i]
        tmp = perm[i]
        perm[i] = perm[j]
        perm[j] = tmp
    return perm


def _twisted_chain_py(table, x0, s):
    out = np.empty(s + 1, dtype=np.int64)
    out[0] = x0
    prev2 = 0
    for i in range(1, s + 1):
        out[i] = table[out[i - 1]] ^ prev2
        prev2 = out[i - 1]
    return out


# ---------------------------------------------------------------------------
# Numpy flavours
# ---------------------------------------------------------------------------


def _jn_series_np(n, xs):
    out = np.zeros(xs.shape[0])
    pos = xs > 0
    if n == 0:
        out[~pos] = 1.0
    if not pos.any():
        return out
    half = 0.5 * xs[pos]
    if n == 0:
        term = np.ones_like(half)
    else:
        # half can underflow to 0 for subnormal x; log then gives -inf and term 0
        with np.errstate(divide="ignore"):
            log_t0 = n * np.log(half) - math.lgamma(n + 1.0)
        live = log_t0 >= -745.0
        term = np.where(live, np.exp(np.maximum(log_t0, -745.0)), 0.0)
    total = term.copy()
    q = half * half
    for m in range(1, 60):
        term = term * (-q / (m * (m + n)))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    out[pos] = total
    return out


def _jn_miller_np(n, xs):
    """Vectorised backward recurrence for a block of arguments >= SERIES_CUTOFF."""
    start = miller_start(n, float(xs.max()))
    bjp1 = np.zeros_like(xs)
    bj = np.ones_like(xs)
    norm = np.zeros_like(xs)
    val = np.zeros_like(xs)
    for k in range(start, 0, -1):
        bjm1 = (2.0 * k / xs) * bj - bjp1
        bjp1 = bj
        bj = bjm1
        idx = k - 1
        if idx == n:
            val = bj.copy()
        if idx > 0 and idx % 2 == 0:
            norm += 2.0 * bj
        big = np.abs(bj) > _BIG
        if big.any():
            f = np.where(big, _SMALL, 1.0)
            bj = bj * f
            bjp1 = bjp1 * f
            norm = norm * f
            if idx <= n:
                val = val * f
    norm += bj
    return val / norm


def _jn_many_np(n, xs):
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty(xs.shape[0])
    small = xs < SERIES_CUTOFF
    if small.any():
        out[small] = _jn_series_np(n, xs[small])
    idx = np.flatnonzero(~small)
    if idx.size:
        # Bucket by magnitude so one start order does not serve wildly different x.
        buckets = np.floor(xs[idx] / 16.0).astype(np.int64)
        for b in np.unique(buckets):
            sel = idx[buckets == b]
            out[sel] = _jn_miller_np(n, xs[sel])
    return out


def _jn_orders_many_np(nmax, x):
    if x < SERIES_CUTOFF:
        xs = np.array([x])
        return np.array([_jn_series_np(k, xs)[0] for k in range(nmax + 1)]), 0.0
    start = miller_start(nmax, x)
    ks = np.arange(start, 0, -1)
    vals = np.empty(start + 1)
    vals[start] = 1.0
    bjp1 = 0.0
    bj = 1.0
    scale_log = np.zeros(start + 1)
    shift = 0.0
    # Sequential dependence; the only vector work is the final normalisation.
    for k in ks:
        bjm1 = (2.0 * k / x) * bj - bjp1
        bjp1, bj = bj, bjm1
        if abs(bj) > _BIG:
            bj *= _SMALL
            bjp1 *= _SMALL
            shift += 1.0
        vals[k - 1] = bj
        scale_log[k - 1] = shift
    # Bring every stored value to the final scale.
    vals = vals * np.power(_SMALL, shift - scale_log)
    norm = vals[0] + 2.0 * vals[2::2].sum()
    vals = vals / norm
    sq = vals[0] ** 2 + 2.0 * np.sum(vals[1:] ** 2)
    return vals[: nmax + 1].copy(), abs(sq - 1.0)


def _line_amplitudes_np(L, k, t):
    p = np.arange(1, L + 1)
    period = 2 * (L + 1)
    w = np.pi / (L + 1)
    lam = 2.0 * np.cos(p * w)
    vk = np.sqrt(2.0 / (L + 1)) * np.sin(((k * p) % period) * w)
    V = np.sqrt(2.0 / (L + 1)) * np.sin((np.outer(p, p) % period) * w)
    return V @ (np.exp(-1j * lam * t) * vk)


def _fisher_yates_np(draws):
    draws = np.asarray(draws, dtype=np.int64)
    perm = np.arange(draws.shape[0], dtype=np.int64)
    for i in range(draws.shape[0] - 1, 0, -1):
        j = draws[i]
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def _twisted_chain_np(table, x0, s):
    table = np.asarray(table, dtype=np.int64)
    out = np.empty(s + 1, dtype=np.int64)
    out[0] = x0
    prev2 = 0
    for i in range(1, s + 1):
        out[i] = table[out[i - 1]] ^ prev2
        prev2 = int(out[i - 1])
    return out


NUMPY_KERNELS = {
    "jn_scalar": _jn_scalar_py,
    "jn_many": _jn_many_np,
    "jn_orders": _jn_orders_many_np,
    "line_amplitudes": _line_amplitudes_np,
    "fisher_yates": _fisher_yates_np,
    "twisted_chain": _twisted_chain_np,
}

if HAS_NUMBA:
    _jn_series_nb = njit(cache=True)(_jn_series_py)
    _jn_orders_nb_inner = njit(cache=True)(_jn_orders_py)

    # Re-bind the helpers the jitted bodies call by name.
    @njit(cache=True)
    def _jn_scalar_nb(n, x):
        if x < SERIES_CUTOFF:
            return _jn_series_nb(n, x)
        start = n + 2 * int(math.ceil(x)) + 20
        start += start & 1
        bjp1 = 0.0
        bj = 1.0
        norm = 0.0
        val = 0.0
        for k in range(start, 0, -1):
            bjm1 = (2.0 * k / x) * bj - bjp1
            bjp1 = bj
            bj = bjm1
            idx = k - 1
            if idx == n:
                val = bj
            if idx > 0 and (idx & 1) == 0:
                norm += 2.0 * bj
            if abs(bj) > _BIG:
                bj *= _SMALL
                bjp1 *= _SMALL
                norm *= _SMALL
                if idx <= n:
                    val *= _SMALL
        norm += bj
        return val / norm

    @njit(cache=True)
    def _jn_many_nb(n, xs):
        out = np.empty(xs.shape[0])
        for i in range(xs.shape[0]):
            out[i] = _jn_scalar_nb(n, xs[i])
        return out

    @njit(cache=True)
    def _jn_orders_many_nb_inner(nmax, x):
        out = np.empty(nmax + 1)
        if x < SERIES_CUTOFF:
            for k in range(nmax + 1):
                out[k] = _jn_series_nb(k, x)
            return out, 0.0
        res = _jn_orders_nb_inner(nmax, x, out)
        return out, res

    def _jn_orders_many_nb(nmax, x):
        return _jn_orders_many_nb_inner(int(nmax), float(x))

    def _jn_many_nb_wrap(n, xs):
        return _jn_many_nb(int(n), np.ascontiguousarray(xs, dtype=np.float64))

    def _jn_scalar_nb_wrap(n, x):
        return _jn_scalar_nb(int(n), float(x))

    _line_amplitudes_nb = njit(cache=True)(_line_amplitudes_py)
    _fisher_yates_nb = njit(cache=True)(_fisher_yates_py)
    _twisted_chain_nb = njit(cache=True)(_twisted_chain_py)

    NUMBA_KERNELS = {
        "jn_scalar": _jn_scalar_nb_wrap,
        "jn_many": _jn_many_nb_wrap,
        "jn_orders": _jn_orders_many_nb,
        "line_amplitudes": lambda L, k, t: _line_amplitudes_nb(int(L), int(k), float(t)),
        "fisher_yates": lambda d: _fisher_yates_nb(np.ascontiguousarray(d, dtype=np.int64)),
        "twisted_chain": lambda table, x0, s: _twisted_chain_nb(
            np.ascontiguousarray(table, dtype=np.int64), int(x0), int(s)
        ),
    }
else:  # pragma: no cover
    NUMBA_KERNELS = None

BACKEND = "numpy" if (_PURE_NUMPY or not HAS_NUMBA) else "numba"
_ACTIVE = NUMPY_KERNELS if BACKEND == "numpy" else NUMBA_KERNELS

jn_scalar = _ACTIVE["jn_scalar"]
jn_many = _ACTIVE["jn_many"]
jn_orders = _ACTIVE["jn_orders"]
line_amplitudes = _ACTIVE["line_amplitudes"]
fisher_yates = _ACTIVE["fisher_yates"]
twisted_chain = _ACTIVE["twisted_chain"]

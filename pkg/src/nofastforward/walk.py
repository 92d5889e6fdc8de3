"""Continuous-time quantum walk on a finite line.

Vertices are labelled 1..L and ``H_L`` is the 0/1 adjacency matrix of the
path. Amplitudes use the convention ``<l| exp(-i H t) |k>``; under it the
infinite-line propagator is ``(-i)^(l-k) J_(l-k)(2t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .bessel import bessel_j, bessel_j_orders
from .errors import ConsistencyError, DomainError

MAX_LENGTH = 4096
_MINUS_I_POW = (1.0 + 0j, -1j, -1.0 + 0j, 1j)


def minus_i_pow(d: int) -> complex:
    """(-i)**d for any integer d, exactly."""
    return _MINUS_I_POW[d % 4]


@dataclass(frozen=True)
class LineWalk:
    length: int
    eigenvalues: np.ndarray = field(repr=False, compare=False)

    @cached_property
    def eigenvectors(self) -> np.ndarray:
        """L x L matrix whose column p-1 is the eigenvector for eigenvalue p."""
        L = self.length
        j = np.arange(1, L + 1)
        idx = np.outer(j, j) % (2 * (L + 1))
        return math.sqrt(2.0 / (L + 1)) * np.sin(idx * np.pi / (L + 1))

    def eigenvector_entries(self, vertex: int) -> np.ndarray:
        """Row ``vertex`` of the eigenvector matrix, computed without materializing it."""
        L = self.length
        p = np.arange(1, L + 1)
        return math.sqrt(2.0 / (L + 1)) * np.sin(((vertex * p) % (2 * (L + 1))) * np.pi / (L + 1))

    def hamiltonian(self) -> np.ndarray:
        L = self.length
        h = np.zeros((L, L))
        i = np.arange(L - 1)
        h[i, i + 1] = 1.0
        h[i + 1, i] = 1.0
        return h


@dataclass(frozen=True)
class ProbabilityProfile:
    length: int
    time: float
    probs: np.ndarray

    def to_json_dict(self) -> dict:
        return {"L": self.length, "t": self.time, "probs": [float(p) for p in self.probs]}


def build_line(L: int) -> LineWalk:
    if int(L) != L or not (1 <= L <= MAX_LENGTH):
        raise DomainError(f"line length L = {L} outside [1, {MAX_LENGTH}]")
    L = int(L)
    p = np.arange(1, L + 1)
    return LineWalk(L, 2.0 * np.cos(p * np.pi / (L + 1)))


def _check_vertex(walk, v, name):
    if int(v) != v or not (1 <= v <= walk.length):
        raise DomainError(f"{name} = {v} outside [1, {walk.length}]")


def propagator_exact(walk: LineWalk, k: int, l: int, t: float) -> complex:
    """<l| exp(-i H_L t) |k> from the closed-form spectral sum."""
    _check_vertex(walk, k, "k")
    _check_vertex(walk, l, "l")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    vk = walk.eigenvector_entries(int(k))
    vl = walk.eigenvector_entries(int(l))
    return complex(np.sum(np.exp(-1j * walk.eigenvalues * t) * vl * vk))


def amplitudes(walk: LineWalk, t: float, k: int = 1) -> np.ndarray:
    """All amplitudes <l| exp(-i H_L t) |k>, l = 1..L, as one array."""
    _check_vertex(walk, k, "k")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    return _kernels.line_amplitudes(walk.length, int(k), float(t))


def propagator_infinite(d: int, t: float) -> complex:
    """<k+d| exp(-i H_inf t) |k> = (-i)^d J_d(2t) on the infinite line."""
    if abs(d) > 200 or not (0 <= t <= 200):
        raise DomainError(f"need |d| <= 200 and 0 <= t <= 200, got d={d}, t={t}")
    return minus_i_pow(int(d)) * bessel_j(int(d), 2.0 * t)


def propagator_image_sum(L: int, l: int, t: float, m_max: int = 2) -> complex:
    """Finite-line amplitude from vertex 1 as a truncated sum over mirror images."""
    if int(L) != L or L < 1 or not (1 <= l <= L):
        raise DomainError(f"need 1 <= l <= L, got L={L}, l={l}")
    if m_max < 1:
        raise DomainError(f"m_max must be >= 1, got {m_max}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    period = 2 * (L + 1)
    orders = []
    for m in range(-m_max, m_max + 1):
        orders.append((+1, l + m * period - 1))
        orders.append((-1, -l + m * period - 1))
    jn = bessel_j_orders(max(abs(d) for _, d in orders), 2.0 * t)
    total = 0j
    for sign, d in orders:
        val = jn[abs(d)] * (-1.0 if (d < 0 and d % 2) else 1.0)
        total += sign * minus_i_pow(d) * val
    return total


def propagator_bessel(l: int, t: float) -> complex:
    """Closed-form approximation (-i)^(l-1) (l/t) J_l(2t) of the amplitude from vertex 1."""
    if l < 1:
        raise DomainError(f"l must be >= 1, got {l}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if t == 0:
        return 1.0 + 0j if l == 1 else 0j
    return minus_i_pow(l - 1) * (l / t) * _kernels.jn_scalar(int(l), 2.0 * t)


def _normalise(probs, what):
    if probs.min() < -1e-12:
        raise ConsistencyError(f"{what}: probability {probs.min()} below -1e-12")
    probs = np.clip(probs, 0.0, None)
    total = probs.sum()
    if abs(total - 1.0) >= 1e-9:
        raise ConsistencyError(f"{what}: probabilities sum to {total!r}")
    return probs / total


def prob_profile(walk: LineWalk, t: float) -> ProbabilityProfile:
    """P(1, l, t) for every vertex l."""
    amp = amplitudes(walk, t, 1)
    probs = _normalise(amp.real**2 + amp.imag**2, f"profile L={walk.length}, t={t}")
    return ProbabilityProfile(walk.length, float(t), probs)


def prob_vs_time(walk: LineWalk, l: int, ts) -> np.ndarray:
    """P(1, l, t) for a fixed vertex over a grid of times."""
    _check_vertex(walk, l, "l")
    ts = np.asarray(ts, dtype=np.float64)
    vl = walk.eigenvector_entries(int(l))
    v1 = walk.eigenvector_entries(1)
    amp = np.exp(-1j * np.outer(ts, walk.eigenvalues)) @ (vl * v1)
    return np.abs(amp) ** 2


def _masses(walk, t):
    if not (0 <= t <= walk.length / 2):
        raise DomainError(f"t = {t} outside [0, L/2] with L = {walk.length}")
    return prob_profile(walk, t).probs


def tail_mass(walk: LineWalk, t: float) -> float:
    """Probability of landing on l >= ceil(t)."""
    probs = _masses(walk, t)
    lo = max(math.ceil(t), 1)
    return float(probs[lo - 1 :].sum())


def head_mass(walk: LineWalk, t: float) -> float:
    """Probability of landing on l <= floor(t)."""
    probs = _masses(walk, t)
    return float(probs[: math.floor(t)].sum())

"""Permutation chains, their oracle variants, and twisted hash chains.

Elements of {0,1}^n are Python/numpy integers. Oracle responses are
(n+1)-bit words: the dummy value is the flag bit ``1 << n`` with a zero
payload, so it never collides with a real element and XOR into a response
register stays an involution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DomainError

MAX_LEVELS = 64
MAX_BITS = 20


def bottom(n: int) -> int:
    """The dummy response word for n-bit elements."""
    return 1 << n


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *key])))


def _check_seed(seed):
    if int(seed) != seed or not (0 <= seed < 2**64):
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}")


# -- query accounting --------------------------------------------------------


@dataclass
class QueryTranscript:
    layers: list = field(default_factory=list)

    def add_layer(self, queries) -> None:
        self.layers.append([tuple(int(v) for v in q) if isinstance(q, tuple) else int(q) for q in queries])

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def widths(self) -> list[int]:
        return [len(layer) for layer in self.layers]

    @property
    def total_queries(self) -> int:
        return sum(self.widths)

    def to_json_dict(self) -> dict:
        return {"layers": [[list(q) if isinstance(q, tuple) else q for q in layer] for layer in self.layers]}


# -- permutation families ----------------------------------------------------


@dataclass(frozen=True)
class PermutationFamily:
    """Levels Pi_1..Pi_L on {0..2^n-1}; row ``i-1`` of ``forward`` is Pi_i."""

    seed: int | None
    levels: int
    bits: int
    forward: np.ndarray = field(repr=False, compare=False)
    inverse: np.ndarray = field(repr=False, compare=False)
    start: int = 0

    @property
    def size(self) -> int:
        return 1 << self.bits

    def apply(self, i: int, x: int) -> int:
        return int(self.forward[i - 1, x])

    def apply_inverse(self, i: int, x: int) -> int:
        return int(self.inverse[i - 1, x])

    @cached_property
    def chain(self) -> np.ndarray:
        """x̄_1..x̄_{L+1} from the configured start (index 0 holds x̄_1)."""
        out = np.empty(self.levels + 1, dtype=np.int64)
        out[0] = self.start
        for i in range(1, self.levels + 1):
            out[i] = self.forward[i - 1, out[i - 1]]
        out.setflags(write=False)
        return out

    def is_bijective(self) -> bool:
        n = self.size
        for row in self.forward:
            if np.bincount(row, minlength=n).max(initial=0) != 1 or row.size != n:
                return False
        return True

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "L": self.levels,
            "n": self.bits,
            "start": int(self.start),
            "points": [int(v) for v in self.chain],
        }


def family_from_tables(tables, seed: int | None = None, start: int = 0) -> PermutationFamily:
    fwd = np.array(tables, dtype=np.int64, copy=True)
    L, N = fwd.shape
    bits = N.bit_length() - 1
    if N != 1 << bits:
        raise DomainError(f"table width {N} is not a power of two")
    inv = np.empty_like(fwd)
    for i in range(L):
        inv[i, fwd[i]] = np.arange(N)
    fwd.setflags(write=False)
    inv.setflags(write=False)
    return PermutationFamily(seed, L, bits, fwd, inv, int(start))


def gen_family(seed: int, L: int, n: int, start: int = 0) -> PermutationFamily:
    """L independent uniformly random permutations of n-bit strings.

    Level i is a Fisher-Yates shuffle driven by its own Philox stream keyed
    on ``(seed, i)``, so the family is a pure function of ``(seed, L, n)``.
    """
    _check_seed(seed)
    if not (1 <= L <= MAX_LEVELS):
        raise DomainError(f"L = {L} outside [1, {MAX_LEVELS}]")
    if not (1 <= n <= MAX_BITS):
        raise DomainError(f"n = {n} outside [1, {MAX_BITS}]")
    N = 1 << n
    if not (0 <= start < N):
        raise DomainError(f"start {start} is not an {n}-bit string")
    fwd = np.empty((L, N), dtype=np.int64)
    bounds = np.arange(1, N + 1)
    for i in range(L):
        draws = _stream(seed, i + 1).integers(0, bounds)
        fwd[i] = _kernels.fisher_yates(draws)
    return family_from_tables(fwd, int(seed), start)


@dataclass(frozen=True)
class ChainPoint:
    index: int
    value: int


def chain_point(fam: PermutationFamily, q: int, start: int | None = None, transcript: QueryTranscript | None = None) -> ChainPoint:
    """Pi_q(...Pi_1(start)...) by forward iteration, one width-1 layer per level."""
    if not (0 <= q <= fam.levels):
        raise DomainError(f"q = {q} outside [0, {fam.levels}]")
    x = fam.start if start is None else int(start)
    if not (0 <= x < fam.size):
        raise DomainError(f"start {x} is not an {fam.bits}-bit string")
    for i in range(1, q + 1):
        if transcript is not None:
            transcript.add_layer([(i, x)])
        x = fam.apply(i, x)
    return ChainPoint(q, x)


def _check_level(fam, j, allow_zero=False):
    if int(j) != j or abs(j) > fam.levels or (j == 0 and not allow_zero):
        raise DomainError(f"level {j} outside [-{fam.levels}, {fam.levels}] without 0")


def _check_elem(fam, x):
    if not (0 <= x < fam.size):
        raise DomainError(f"{x} is not an {fam.bits}-bit string")


def spi_apply(fam: PermutationFamily, j: int, x: int, r: int) -> int:
    """Response register after one query |j, x, r> -> |j, x, r ^ Pi_j(x)>."""
    _check_level(fam, j)
    _check_elem(fam, x)
    y = fam.apply(j, x) if j > 0 else fam.apply_inverse(-j, x)
    return int(r) ^ y


def erased_apply(fam: PermutationFamily, i: int, x: int) -> int:
    """Erased level: x̄_i -> x̄_{i+1}; every other input -> dummy."""
    if not (1 <= i <= fam.levels):
        raise DomainError(f"level {i} outside [1, {fam.levels}]")
    _check_elem(fam, x)
    c = fam.chain
    return int(c[i]) if x == c[i - 1] else bottom(fam.bits)


def erased_inverse_apply(fam: PermutationFamily, i: int, x: int) -> int:
    """Inverse of the erased level: x̄_{i+1} -> x̄_i; otherwise dummy."""
    if not (1 <= i <= fam.levels):
        raise DomainError(f"level {i} outside [1, {fam.levels}]")
    _check_elem(fam, x)
    c = fam.chain
    return int(c[i - 1]) if x == c[i] else bottom(fam.bits)


def erased_word(fam: PermutationFamily, j: int, x: int) -> int:
    _check_level(fam, j)
    return erased_apply(fam, j, x) if j > 0 else erased_inverse_apply(fam, -j, x)


def hybrid_apply(fam: PermutationFamily, ell: int, j: int, x: int, r: int) -> int:
    """Erased oracle on levels |j| <= ell, identity on the rest."""
    if not (0 <= ell <= fam.levels):
        raise DomainError(f"cutoff {ell} outside [0, {fam.levels}]")
    _check_level(fam, j)
    _check_elem(fam, x)
    if abs(j) <= ell:
        return int(r) ^ erased_word(fam, j, x)
    return int(r)


# -- merged and repaired families ----------------------------------------------


@dataclass(frozen=True)
class MergedOracle:
    """Per level: x̄_i -> x̄_{i+1}, anything else -> Pi^R_i(x). May not be injective."""

    chain: np.ndarray
    random: PermutationFamily
    tables: np.ndarray = field(repr=False)

    @property
    def levels(self) -> int:
        return self.random.levels

    @property
    def bits(self) -> int:
        return self.random.bits

    def apply(self, i: int, x: int) -> int:
        return int(self.tables[i - 1, x])

    def collision_points(self, i: int) -> tuple[int, int]:
        """(x̄'_i, x̄'_{-i}) = ((Pi^R_i)^-1(x̄_{i+1}), Pi^R_i(x̄_i))."""
        return (
            self.random.apply_inverse(i, int(self.chain[i])),
            self.random.apply(i, int(self.chain[i - 1])),
        )


def merge_random(fam_chain: PermutationFamily, fam_random: PermutationFamily) -> MergedOracle:
    if (fam_chain.levels, fam_chain.bits) != (fam_random.levels, fam_random.bits):
        raise DomainError("families differ in (L, n)")
    chain = fam_chain.chain
    tables = np.array(fam_random.forward, copy=True)
    for i in range(fam_chain.levels):
        tables[i, chain[i]] = chain[i + 1]
    tables.setflags(write=False)
    return MergedOracle(chain, fam_random, tables)


def collision_census(merged: MergedOracle) -> list[int]:
    """Number of images with two preimages, per level, by exhaustive scan."""
    N = 1 << merged.bits
    return [int(np.count_nonzero(np.bincount(row, minlength=N) > 1)) for row in merged.tables]


def repair_to_permutation(merged: MergedOracle) -> PermutationFamily:
    """Reroute x̄'_i -> x̄'_{-i} so every level is a bijection again."""
    tables = np.array(merged.tables, copy=True)
    for i in range(1, merged.levels + 1):
        src, dst = merged.collision_points(i)
        if src != int(merged.chain[i - 1]):
            tables[i - 1, src] = dst
    return family_from_tables(tables, None, int(merged.chain[0]))


# -- twisted hash chains -------------------------------------------------------

def random_hash(seed: int, n: int) -> np.ndarray:
    """Seeded uniformly random table {0,1}^n -> {0,1}^n."""
    _check_seed(seed)
    if not (1 <= n <= MAX_BITS):
        raise DomainError(f"n = {n} outside [1, {MAX_BITS}]")
    return _stream(seed, 0xC4A1).integers(0, 1 << n, size=1 << n, dtype=np.int64)


def _hash_fn(h) -> Callable[[int], int]:
    if callable(h):
        return lambda x: int(h(int(x)))
    table = np.asarray(h)
    return lambda x: int(table[int(x)])


@dataclass(frozen=True)
class TwistedChain:
    elements: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.elements) - 1

    def __getitem__(self, i):
        return self.elements[i]

    def violations(self, h, overrides: dict | None = None) -> list[int]:
        """Indices i >= 1 where x_i != h(x_{i-1}) ^ x_{i-2}.

        ``overrides`` maps points to hash values that replace ``h`` there.
        """
        f = _hash_fn(h)
        overrides = overrides or {}
        xs = self.elements
        bad = []
        for i in range(1, len(xs)):
            hv = overrides.get(xs[i - 1], None)
            hv = f(xs[i - 1]) if hv is None else hv
            prev2 = xs[i - 2] if i >= 2 else 0
            if xs[i] != hv ^ prev2:
                bad.append(i)
        return bad


def twisted_extend(h, x0: int, s: int) -> TwistedChain:
    """x_0..x_s with x_i = h(x_{i-1}) ^ x_{i-2} and x_{-1} = 0."""
    if s < 0:
        raise DomainError(f"s must be >= 0, got {s}")
    if not callable(h):
        vals = _kernels.twisted_chain(np.asarray(h, dtype=np.int64), int(x0), int(s))
        return TwistedChain(tuple(int(v) for v in vals))
    f = _hash_fn(h)
    xs = [int(x0)]
    prev2 = 0
    for _ in range(s):
        xs.append(f(xs[-1]) ^ prev2)
        prev2 = xs[-2]
    return TwistedChain(tuple(xs))


def twisted_verify(h, x0: int, xq: int, xq1: int, q: int) -> bool:
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    c = twisted_extend(h, x0, q + 1)
    return c[q] == int(xq) and c[q + 1] == int(xq1)


def complete_chain_D(h, x0: int, xq: int, xq1: int, q: int, transcript: QueryTranscript | None = None):
    """Fill in x_0..x_{2q+1} from (x_0, x_q, x_{q+1}) with q layers of 2 queries.

    Layer i < q queries (x_{i-1}, x_{q+i}) and extends both halves; the last
    layer queries (x_{q-1}, x_{2q}). The value at x_q is never queried: it is
    synthesised as ``H'(x_q) = x_{q-1} ^ x_{q+1}``.

    Returns ``(chain, transcript, h_prime_xq)``.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    f = _hash_fn(h)
    tr = QueryTranscript() if transcript is None else transcript
    xs: list[int | None] = [None] * (2 * q + 2)
    xs[0], xs[q], xs[q + 1] = int(x0), int(xq), int(xq1)
    for i in range(1, q):
        a, b = xs[i - 1], xs[q + i]
        tr.add_layer([a, b])
        xs[i] = f(a) ^ (xs[i - 2] if i >= 2 else 0)
        xs[q + i + 1] = f(b) ^ xs[q + i - 1]
    a, b = xs[q - 1], xs[2 * q]
    # h(x_{q-1}) rides along in the last layer; only h(x_{2q}) is used
    tr.add_layer([a, b])
    xs[2 * q + 1] = f(b) ^ xs[2 * q - 1]
    h_prime = xs[q - 1] ^ xs[q + 1]
    return TwistedChain(tuple(int(v) for v in xs)), tr, h_prime


def bound_F(k: int, q: int, Ysize: int) -> float:
    """Closed-form success bound F(k, q) for |Y| outputs."""
    if k < 1 or q < 1 or Ysize < 2:
        raise DomainError(f"need k >= 1, q >= 1, |Y| >= 2, got k={k}, q={q}, |Y|={Ysize}")
    Y = float(Ysize)
    t1 = q * math.e * k * math.sqrt(5 * k * q * (k * q + 1) / Y)
    t2 = math.e * (q + 2) * math.sqrt(5 * (q + 2) * (q + 3) / Y)
    t3 = math.sqrt((q + 2) / Y)
    return (t1 + t2 + t3) ** 2

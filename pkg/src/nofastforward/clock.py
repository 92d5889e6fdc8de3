"""Johnson-graph clock register.

Time steps 1..M are the k-subsets of {1..n} in revolving-door order, so
consecutive subsets differ by exchanging one element. Each time step is
encoded as the n-qubit indicator bitstring; character ``i-1`` of the string
is qubit ``i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import islice
from math import comb
from typing import Iterator

import numpy as np

from .errors import DomainError

MAX_QUBITS = 24
MATERIALIZE_LIMIT = 16


class _Annihilated:
    __slots__ = ()

    def __repr__(self):
        return "ANNIHILATED"

    def __bool__(self):
        return False


ANNIHILATED = _Annihilated()

_KET1BRA1 = np.array([[0, 0], [0, 1]], dtype=float)
_KET1BRA0 = np.array([[0, 0], [1, 0]], dtype=float)
_KET0BRA1 = np.array([[0, 1], [0, 0]], dtype=float)
_ID2 = np.eye(2)


def min_clock_qubits(c: int, T: int) -> int:
    """Smallest n with C(n, c-1) >= T."""
    if c < 2 or T < 1:
        raise DomainError(f"need c >= 2 and T >= 1, got c={c}, T={T}")
    n = c - 1
    while comb(n, c - 1) < T:
        n += 1
    return n


def revolving_door(n: int, k: int, reverse: bool = False) -> Iterator[tuple[int, ...]]:
    """Yield the k-subsets of {1..n} (sorted tuples) in revolving-door order."""
    if k == 0:
        yield ()
        return
    if k == n:
        yield tuple(range(1, n + 1))
        return
    if not reverse:
        yield from revolving_door(n - 1, k, False)
        for c in revolving_door(n - 1, k - 1, True):
            yield c + (n,)
    else:
        for c in revolving_door(n - 1, k - 1, False):
            yield c + (n,)
        yield from revolving_door(n - 1, k, True)


@dataclass(frozen=True)
class JohnsonClock:
    qubits: int
    weight: int
    _path: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def length(self) -> int:
        return comb(self.qubits, self.weight)

    @property
    def locality(self) -> int:
        return self.weight + 1

    def iter_path(self) -> Iterator[frozenset]:
        if self._path is not None:
            yield from self._path
        else:
            for c in revolving_door(self.qubits, self.weight):
                yield frozenset(c)

    @cached_property
    def path(self) -> tuple:
        if self._path is not None:
            return self._path
        return tuple(self.iter_path())

    def subset(self, j: int) -> frozenset:
        """S_j, 1-indexed."""
        if not (1 <= j <= self.length):
            raise DomainError(f"time index {j} outside [1, {self.length}]")
        if self._path is not None:
            return self._path[j - 1]
        return next(islice(self.iter_path(), j - 1, None))

    def encode(self, subset) -> str:
        return "".join("1" if i in subset else "0" for i in range(1, self.qubits + 1))

    def encoding(self, j: int) -> str:
        return self.encode(self.subset(j))

    @cached_property
    def encodings(self) -> dict:
        return {j: self.encode(s) for j, s in enumerate(self.path, start=1)}

    def mask(self, subset) -> int:
        n = self.qubits
        return sum(1 << (n - i) for i in subset)

    def index_of(self, j: int) -> int:
        """Computational-basis index of |S_j> (qubit 1 most significant)."""
        return self.mask(self.subset(j))

    def to_json_dict(self) -> dict:
        return {"n": self.qubits, "k": self.weight, "path": [self.encode(s) for s in self.path]}

    # -- transitions -------------------------------------------------------

    def _masks(self, j):
        if not (1 <= j <= self.length - 1):
            raise DomainError(f"transition index {j} outside [1, {self.length - 1}]")
        a, b = self.subset(j), self.subset(j + 1)
        return self.mask(a & b), self.mask(b - a), self.mask(a - b)

    def transition_factors(self, j: int) -> list[np.ndarray]:
        """Per-qubit 2x2 factors of E_{j -> j+1}, qubit 1 first."""
        if not (1 <= j <= self.length - 1):
            raise DomainError(f"transition index {j} outside [1, {self.length - 1}]")
        a, b = self.subset(j), self.subset(j + 1)
        out = []
        for i in range(1, self.qubits + 1):
            if i in a and i in b:
                out.append(_KET1BRA1)
            elif i in b:
                out.append(_KET1BRA0)
            elif i in a:
                out.append(_KET0BRA1)
            else:
                out.append(_ID2)
        return out

    def transition_support(self, j: int) -> list[int]:
        """Qubits (1-based) on which E_{j -> j+1} is not the identity."""
        return [i for i, f in enumerate(self.transition_factors(j), start=1) if f is not _ID2]

    def transition_matrix(self, j: int) -> np.ndarray:
        out = np.ones((1, 1))
        for f in self.transition_factors(j):
            out = np.kron(out, f)
        return out

    def transition_map(self, j: int) -> np.ndarray:
        """Array m with E|c> = |m[c]>, or m[c] = -1 where E annihilates |c>."""
        keep, add, rem = self._masks(j)
        c = np.arange(1 << self.qubits)
        ok = ((c & keep) == keep) & ((c & add) == 0) & ((c & rem) == rem)
        return np.where(ok, c ^ add ^ rem, -1)


def build_clock(n: int, k: int) -> JohnsonClock:
    if not (1 <= k <= n <= MAX_QUBITS):
        raise DomainError(f"need 1 <= k <= n <= {MAX_QUBITS}, got n={n}, k={k}")
    path = None
    if n <= MATERIALIZE_LIMIT:
        path = tuple(frozenset(c) for c in revolving_door(n, k))
    return JohnsonClock(n, k, path)


def apply_transition(clock: JohnsonClock, j: int, state: str):
    """Apply E_{j -> j+1} to a computational basis string.

    Returns the image bitstring, or ``ANNIHILATED`` when some factor kills it.
    """
    if len(state) != clock.qubits or set(state) - {"0", "1"}:
        raise DomainError(f"state must be a {clock.qubits}-bit string, got {state!r}")
    keep, add, rem = clock._masks(j)
    x = int(state, 2)
    if (x & keep) != keep or (x & add) or (x & rem) != rem:
        return ANNIHILATED
    return format(x ^ add ^ rem, f"0{clock.qubits}b")

"""Sparse-access oracles for the permutation-chain walk graph.

Vertices are pairs (j, x) with 0 <= j <= L and x an n-bit string, packed as
``j * 2^n + x``. Column j is joined to column j+1 by the edges
x -> Pi_{j+1}(x), so the graph is 2^n disjoint paths of L+1 vertices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import walk
from .chains import PermutationFamily, QueryTranscript
from .errors import CapacityError, DomainError, SlotError

DENSE_CAP = 4096


@dataclass(frozen=True)
class WalkGraphHamiltonian:
    family: PermutationFamily

    @property
    def levels(self) -> int:
        return self.family.levels

    @property
    def bits(self) -> int:
        return self.family.bits

    @property
    def dim(self) -> int:
        return (self.levels + 1) << self.bits

    def index(self, v) -> int:
        j, x = _check_vertex(self, v)
        return (j << self.bits) + x

    def vertex(self, index: int) -> tuple[int, int]:
        if not (0 <= index < self.dim):
            raise DomainError(f"index {index} outside [0, {self.dim})")
        return index >> self.bits, index & ((1 << self.bits) - 1)


def _check_vertex(wgh, v):
    j, x = int(v[0]), int(v[1])
    if not (0 <= j <= wgh.levels and 0 <= x < (1 << wgh.bits)):
        raise DomainError(f"vertex {tuple(v)} outside columns [0, {wgh.levels}] x {wgh.bits}-bit strings")
    return j, x


def entry_oracle(wgh: WalkGraphHamiltonian, u, v) -> int:
    """Matrix element <v|H|u> (0 or 1)."""
    j, x = _check_vertex(wgh, u)
    jp, xp = _check_vertex(wgh, v)
    fam = wgh.family
    if jp == j + 1 and xp == fam.apply(j + 1, x):
        return 1
    if jp == j - 1 and xp == fam.apply_inverse(j, x):
        return 1
    return 0


def structure_oracle(wgh: WalkGraphHamiltonian, v, s: int) -> tuple[int, int]:
    """The s-th neighbour of v (s = 1, 2); boundary columns have only s = 1."""
    j, x = _check_vertex(wgh, v)
    L, fam = wgh.levels, wgh.family
    if s not in (1, 2):
        raise SlotError(f"slot {s} is not 1 or 2")
    if j == 0:
        if s == 2:
            raise SlotError("column 0 has a single neighbour")
        return 1, fam.apply(1, x)
    if j == L:
        if s == 2:
            raise SlotError(f"column {L} has a single neighbour")
        return L - 1, fam.apply_inverse(L, x)
    if s == 1:
        return j - 1, fam.apply_inverse(j, x)
    return j + 1, fam.apply(j + 1, x)


def slots(wgh: WalkGraphHamiltonian, v) -> tuple[int, ...]:
    j, _ = _check_vertex(wgh, v)
    return (1,) if j in (0, wgh.levels) else (1, 2)


def materialize(wgh: WalkGraphHamiltonian) -> np.ndarray:
    if wgh.dim > DENSE_CAP:
        raise CapacityError(f"dense dimension {wgh.dim} exceeds {DENSE_CAP}")
    N = 1 << wgh.bits
    h = np.zeros((wgh.dim, wgh.dim), dtype=np.int8)
    x = np.arange(N)
    for j in range(wgh.levels):
        rows = j * N + x
        cols = (j + 1) * N + wgh.family.forward[j]
        h[cols, rows] = 1
        h[rows, cols] = 1
    return h


def coo_text(matrix: np.ndarray) -> str:
    """Nonzeros as ``row col value`` lines."""
    r, c = np.nonzero(matrix)
    return "".join(f"{i} {j} {matrix[i, j].item()!r}\n" for i, j in zip(r.tolist(), c.tolist()))


def line_through(wgh: WalkGraphHamiltonian, x0: int = 0) -> np.ndarray:
    """Packed indices of the path that starts at (0, x0)."""
    pts = [int(x0)]
    for j in range(1, wgh.levels + 1):
        pts.append(wgh.family.apply(j, pts[-1]))
    return np.array([(j << wgh.bits) + x for j, x in enumerate(pts)], dtype=np.int64)


def _reduction_setup(wgh, t):
    if not (0 <= t <= wgh.levels / 2):
        raise DomainError(f"t = {t} outside [0, L/2] with L = {wgh.levels}")
    tr = QueryTranscript()
    points = [0]
    for q in range(1, wgh.levels + 1):
        # one forward query per level identifies the line through 0^n
        tr.add_layer([(q, points[-1])])
        points.append(wgh.family.apply(q, points[-1]))
    line = walk.build_line(wgh.levels + 1)
    amp = walk.amplitudes(line, t, 1)
    p = amp.real**2 + amp.imag**2
    return np.array(points, dtype=np.int64), p / p.sum(), tr


def run_reduction_oracle(wgh: WalkGraphHamiltonian, t: float, rng: np.random.Generator):
    """Evolve |0, 0^n>, measure (q, x_q); returns ``(q, x_q, transcript)``."""
    points, p, tr = _reduction_setup(wgh, t)
    q = int(rng.choice(p.size, p=p))
    return q, int(points[q]), tr


def run_reduction_oracle_many(wgh: WalkGraphHamiltonian, t: float, rng: np.random.Generator, samples: int):
    points, p, tr = _reduction_setup(wgh, t)
    qs = rng.choice(p.size, size=samples, p=p)
    return qs, points[qs], tr

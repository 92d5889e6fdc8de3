"""Circuit to time-dependent Hamiltonian.

Two passes. :func:`to_geometrically_local` routes every two-qubit gate onto
neighbouring wires with a swap network. Each original gate becomes a stage of
exactly ``n - 1`` routing gates (swaps, padded with identities) followed by
the gate itself. :func:`to_piecewise` then turns every gate ``U`` into a
constant generator ``G = i log U`` applied for unit time, so that
``exp(-i G) = U``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import schur

from .circuits import NAMED_GATES, Gate, GateCircuit, apply_gate, basis_state, index_to_bits
from .errors import DomainError

UNITARY_TOL = 1e-10
_SWAP = NAMED_GATES["SWAP"]


def _dummy(n: int) -> Gate:
    if n >= 2:
        return Gate(NAMED_GATES["I2"], (0, 1), "I2")
    return Gate(NAMED_GATES["I"], (0,), "I")


@dataclass(frozen=True)
class GeomLocalCircuit:
    """Nearest-neighbour circuit plus the logical-to-physical wire layouts.

    ``wire_permutation[i]`` is the physical wire holding logical qubit ``i``
    at the end; ``stage_permutations[k]`` is the layout after block ``k + 1``.
    """

    circuit: GateCircuit
    wire_permutation: tuple[int, ...]
    stage_permutations: tuple[tuple[int, ...], ...]
    stage_length: int

    @property
    def qubits(self) -> int:
        return self.circuit.qubits

    def layout_after(self, blocks: int) -> tuple[int, ...]:
        if blocks == 0:
            return tuple(range(self.qubits))
        return self.stage_permutations[blocks - 1]

    def to_physical(self, state: np.ndarray, layout=None) -> np.ndarray:
        """Move a logically ordered statevector onto physical wires."""
        return _permute_axes(state, self.wire_permutation if layout is None else layout, self.qubits)

    def to_logical(self, state: np.ndarray, layout=None) -> np.ndarray:
        layout = self.wire_permutation if layout is None else layout
        n = self.qubits
        psi = np.asarray(state).reshape((2,) * n)
        return np.transpose(psi, layout).reshape(-1)


def _permute_axes(state, layout, n):
    # physical axis layout[i] takes logical axis i
    psi = np.asarray(state).reshape((2,) * n)
    return np.moveaxis(psi, list(range(n)), list(layout)).reshape(-1)


def to_geometrically_local(circuit: GateCircuit, block_size: int | None = None) -> GeomLocalCircuit:
    """Swap-route ``circuit`` onto a line; the output acts as ``pi . C``.

    With ``block_size = s`` a layout is recorded after every ``s`` original
    gates (one per iterated block); otherwise after every gate.
    """
    n = circuit.qubits
    block = 1 if block_size is None else int(block_size)
    if block < 1:
        raise DomainError(f"block size must be >= 1, got {block_size}")
    pos = list(range(n))
    occ = list(range(n))
    out: list[Gate] = []
    stages = []
    for count, g in enumerate(circuit.gates, start=1):
        routing = []
        if g.arity == 2:
            pa, pb = pos[g.wires[0]], pos[g.wires[1]]
            lo, hi = min(pa, pb), max(pa, pb)
            for p in range(lo, hi - 1):
                routing.append(Gate(_SWAP, (p, p + 1), "SWAP"))
                occ[p], occ[p + 1] = occ[p + 1], occ[p]
                pos[occ[p]], pos[occ[p + 1]] = p, p + 1
        routing.extend(_dummy(n) for _ in range(n - 1 - len(routing)))
        out.extend(routing)
        out.append(Gate(g.matrix, tuple(pos[w] for w in g.wires), g.name))
        if count % block == 0:
            stages.append(tuple(pos))
    return GeomLocalCircuit(GateCircuit(n, tuple(out)), tuple(pos), tuple(stages), n)


# -- piecewise-constant Hamiltonian -------------------------------------------


@dataclass(frozen=True)
class Segment:
    """Generator ``G = V diag(phases) V^dag`` on ``wires`` for one unit of time."""

    wires: tuple[int, ...]
    unitary: np.ndarray
    phases: np.ndarray
    eigvecs: np.ndarray

    @property
    def generator(self) -> np.ndarray:
        v = self.eigvecs
        g = (v * self.phases) @ v.conj().T
        return (g + g.conj().T) / 2

    def propagator(self, tau: float) -> np.ndarray:
        """exp(-i G tau)."""
        if tau == 1.0:
            return self.unitary
        v = self.eigvecs
        return (v * np.exp(-1j * self.phases * tau)) @ v.conj().T


@dataclass(frozen=True)
class PiecewiseHamiltonian:
    qubits: int
    segments: tuple[Segment, ...]

    @property
    def total_time(self) -> int:
        return len(self.segments)

    def to_json_dict(self) -> dict:
        def mat(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in m]

        return {
            "qubits": self.qubits,
            "total_time": self.total_time,
            "segments": [{"wires": list(s.wires), "duration": 1, "generator": mat(s.generator)} for s in self.segments],
        }


def principal_generator(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in (-pi, pi] and eigenvectors of ``G = i log U``."""
    u = np.asarray(u, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=UNITARY_TOL, rtol=0):
        raise DomainError("matrix is not unitary to 1e-10")
    t, z = schur(u, output="complex")
    lam = np.diagonal(t)
    phases = -np.angle(lam)
    # -1 sits on the branch cut; send it to +pi
    phases = np.where(phases <= -np.pi + 1e-12, np.pi, phases)
    return phases, z


def to_piecewise(circuit: GateCircuit) -> PiecewiseHamiltonian:
    segs = []
    for g in circuit.gates:
        phases, vecs = principal_generator(g.matrix)
        segs.append(Segment(g.wires, g.matrix, phases, vecs))
    return PiecewiseHamiltonian(circuit.qubits, tuple(segs))


def evolve_piecewise(ph: PiecewiseHamiltonian, input_state, t: float, t_start: float = 0.0) -> np.ndarray:
    """Evolve from time ``t_start`` to ``t`` under the piecewise generator."""
    if not (0.0 <= t_start <= t <= ph.total_time):
        raise DomainError(f"need 0 <= t_start <= t <= {ph.total_time}, got t_start={t_start}, t={t}")
    n = ph.qubits
    psi = basis_state(input_state) if isinstance(input_state, str) else np.asarray(input_state, dtype=complex)
    for k in range(int(math.floor(t_start)) + 1, int(math.ceil(t)) + 1):
        a, b = max(t_start, k - 1.0), min(t, float(k))
        if b > a:
            seg = ph.segments[k - 1]
            psi = apply_gate(psi, Gate(seg.propagator(b - a), seg.wires), n)
    return psi


def run_reduction_dep(g_circuit: GateCircuit, T: int, t: float, input_state, rng: np.random.Generator):
    """Time-dependent reduction: evolve to t, finish the current block, measure.

    Returns ``(m, x_m)`` with ``x_m`` read back in logical wire order.
    """
    s = len(g_circuit)
    if s < 1 or T < 1:
        raise DomainError(f"need a nonempty gadget and T >= 1, got s={s}, T={T}")
    geo = to_geometrically_local(g_circuit.repeat(T), block_size=s)
    ph = to_piecewise(geo.circuit)
    if not (0 <= t <= ph.total_time):
        raise DomainError(f"t = {t} outside [0, {ph.total_time}]")
    block = geo.stage_length * s
    psi = evolve_piecewise(ph, input_state, t)
    m = math.ceil(math.ceil(t) / block)
    psi = evolve_piecewise(ph, psi, float(m * block), t_start=float(t))
    p = np.abs(psi) ** 2
    idx = int(rng.choice(p.size, p=p / p.sum()))
    phys = index_to_bits(idx, geo.qubits)
    layout = geo.layout_after(m)
    return m, "".join(phys[layout[i]] for i in range(geo.qubits))

"""Circuit-to-Hamiltonian reduction with a clock register.

``H = sum_j U_j (x) |j><j-1| + U_j^dag (x) |j-1><j|`` over circuit (x) clock.
Started from ``|phi_0> (x) |gamma_0>`` the dynamics never leave the span of
the history states, where they are the line walk on L+1 vertices. The
restricted evolution therefore reuses :mod:`nofastforward.walk` and only the
test oracles touch dense matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import walk
from .circuits import GateCircuit, basis_state, embed, index_to_bits
from .clock import JohnsonClock, build_clock, min_clock_qubits
from .errors import CapacityError, ConsistencyError, DomainError

DENSE_CAP = 4096


class LineClock:
    """One-hot clock: time j is basis state j of a (times)-dimensional register."""

    def __init__(self, times: int):
        self.times = int(times)
        self.dim = self.times

    def basis_index(self, j: int) -> int:
        return j

    def transition_pairs(self, j: int):
        """(src, dst) clock indices where |j><j-1| acts nontrivially."""
        return np.array([j - 1]), np.array([j])


class JohnsonTimeClock:
    """Adapter mapping circuit time j = 0..M-1 onto Johnson path element S_{j+1}."""

    def __init__(self, clock: JohnsonClock):
        self.clock = clock
        self.times = clock.length
        self.dim = 1 << clock.qubits

    def basis_index(self, j: int) -> int:
        return self.clock.index_of(j + 1)

    def transition_pairs(self, j: int):
        m = self.clock.transition_map(j)
        src = np.flatnonzero(m >= 0)
        return src, m[src]


def _as_time_clock(clock):
    if isinstance(clock, JohnsonClock):
        return JohnsonTimeClock(clock)
    return clock


def johnson_clock_for(num_gates: int, locality: int = 3) -> JohnsonClock:
    """Smallest Johnson clock of the given locality with room for num_gates+1 times."""
    n = min_clock_qubits(locality, num_gates + 1)
    return build_clock(max(n, locality - 1), locality - 1)


@dataclass
class FeynmanHamiltonian:
    circuit: GateCircuit
    clock: object

    @property
    def L(self) -> int:
        return len(self.circuit)

    @property
    def dim(self) -> int:
        return (2**self.circuit.qubits) * self.clock.dim

    def _terms(self):
        n = self.circuit.qubits
        for j, g in enumerate(self.circuit.gates, start=1):
            src, dst = self.clock.transition_pairs(j)
            yield embed(g, n), src, dst

    def matvec(self, vec: np.ndarray) -> np.ndarray:
        N, C = 2**self.circuit.qubits, self.clock.dim
        psi = np.asarray(vec, dtype=complex).reshape(N, C)
        out = np.zeros_like(psi)
        for u, src, dst in self._terms():
            out[:, dst] += u @ psi[:, src]
            out[:, src] += u.conj().T @ psi[:, dst]
        return out.reshape(-1)

    def dense(self) -> np.ndarray:
        if self.dim > DENSE_CAP:
            raise CapacityError(f"dense dimension {self.dim} exceeds {DENSE_CAP}")
        N, C = 2**self.circuit.qubits, self.clock.dim
        h = np.zeros((N, C, N, C), dtype=complex)
        for u, src, dst in self._terms():
            for s, d in zip(src, dst):
                h[:, d, :, s] += u
                h[:, s, :, d] += u.conj().T
        return h.reshape(self.dim, self.dim)

    def history_states(self, phi0) -> np.ndarray:
        """Rows are |psi_j> = U_j..U_1|phi_0> (x) |gamma_j>, j = 0..L."""
        N, C = 2**self.circuit.qubits, self.clock.dim
        out = np.zeros((self.L + 1, N * C), dtype=complex)
        phi = np.asarray(phi0, dtype=complex)
        for j in range(self.L + 1):
            if j:
                phi = self.circuit.run(phi, j - 1, j)
            e = np.zeros(C)
            e[self.clock.basis_index(j)] = 1.0
            out[j] = np.kron(phi, e)
        return out


def build_feynman_h(circuit: GateCircuit, clock) -> FeynmanHamiltonian:
    clock = _as_time_clock(clock)
    if clock.times < len(circuit) + 1:
        raise DomainError(f"clock has {clock.times} times, circuit needs {len(circuit) + 1}")
    return FeynmanHamiltonian(circuit, clock)


def dense_evolve(h, state, t: float) -> np.ndarray:
    """exp(-i H t)|state> by Hermitian eigendecomposition (test oracle path)."""
    mat = h.dense() if hasattr(h, "dense") else np.asarray(h)
    if mat.shape[0] > DENSE_CAP:
        raise CapacityError(f"dense dimension {mat.shape[0]} exceeds {DENSE_CAP}")
    w, v = np.linalg.eigh(mat)
    return v @ (np.exp(-1j * w * t) * (v.conj().T @ np.asarray(state, dtype=complex)))


@dataclass(frozen=True)
class HistoryState:
    time_amplitudes: np.ndarray
    base_input: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        a = self.time_amplitudes
        return a.real**2 + a.imag**2


def _as_state(x, n):
    if isinstance(x, str):
        if len(x) != n:
            raise DomainError(f"input bitstring {x!r} is not {n} bits")
        return basis_state(x)
    psi = np.asarray(x, dtype=complex)
    if psi.shape != (2**n,):
        raise DomainError(f"input state has shape {psi.shape}, expected ({2**n},)")
    return psi


def evolve_restricted(circuit: GateCircuit, input_state, t: float) -> HistoryState:
    """Clock-time amplitudes alpha_j = <j| exp(-i H_line t) |0> on L+1 vertices."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    line = walk.build_line(len(circuit) + 1)
    alpha = walk.amplitudes(line, t, 1)
    return HistoryState(alpha, _as_state(input_state, circuit.qubits))


def sample_clock_and_collapse(hs: HistoryState, circuit: GateCircuit, rng: np.random.Generator):
    """Measure the clock; return (l, U_l..U_1 |phi_0>)."""
    p = hs.probabilities
    total = p.sum()
    if not total > 0 or abs(total - 1.0) > 1e-9:
        raise ConsistencyError(f"clock amplitudes have total weight {total!r}")
    l = int(rng.choice(p.size, p=p / total))
    return l, circuit.run(hs.base_input, 0, l)


def _check_reduction(g_circuit, T, t):
    s = len(g_circuit)
    if s < 1 or T < 1:
        raise DomainError(f"need a nonempty gadget and T >= 1, got s={s}, T={T}")
    if not (0 <= t <= s * T):
        raise DomainError(f"t = {t} outside [0, s*T] = [0, {s * T}]")
    return s


def _measure(state, n, rng):
    p = np.abs(state) ** 2
    return index_to_bits(int(rng.choice(p.size, p=p / p.sum())), n)


def run_reduction_local(g_circuit: GateCircuit, T: int, t: float, input_state, rng):
    """One run of the reduction: evolve, read the clock, finish the block, measure.

    Returns ``(m, x_m)`` where ``x_m`` is the measured bitstring after
    ``m * s`` gates of the T-fold iterated gadget.
    """
    s = _check_reduction(g_circuit, T, t)
    circuit = g_circuit.repeat(T)
    hs = evolve_restricted(circuit, input_state, t)
    l, phi_l = sample_clock_and_collapse(hs, circuit, rng)
    m = math.ceil(l / s)
    phi_m = circuit.run(phi_l, l, m * s)
    return m, _measure(phi_m, circuit.qubits, rng)


def run_reduction_local_many(g_circuit: GateCircuit, T: int, t: float, input_state, rng, samples: int):
    """Vectorised :func:`run_reduction_local`; prefix states are cached per clock outcome."""
    s = _check_reduction(g_circuit, T, t)
    circuit = g_circuit.repeat(T)
    hs = evolve_restricted(circuit, input_state, t)
    p = hs.probabilities
    ls = rng.choice(p.size, size=samples, p=p / p.sum())
    finals = {}
    ms = np.empty(samples, dtype=np.int64)
    xs = []
    for i, l in enumerate(ls):
        l = int(l)
        m = math.ceil(l / s)
        if l not in finals:
            phi_l = circuit.run(hs.base_input, 0, l)
            finals[l] = circuit.run(phi_l, l, m * s)
        ms[i] = m
        xs.append(_measure(finals[l], circuit.qubits, rng))
    return ms, xs

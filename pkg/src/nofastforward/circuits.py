"""Gate lists over a handful of qubits, statevector application, JSON I/O.

Wires are 0-based. Wire 0 is the most significant bit of a basis index, so
the bitstring ``"011"`` is basis index 3 with wire 0 in state 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError

MAX_QUBITS = 10

_S2 = 1 / np.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "I2": np.eye(4, dtype=complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


@dataclass(frozen=True)
class Gate:
    matrix: np.ndarray
    wires: tuple[int, ...]
    name: str | None = None

    @property
    def arity(self) -> int:
        return len(self.wires)

    def dagger(self) -> "Gate":
        return Gate(self.matrix.conj().T, self.wires, None if self.name is None else self.name + "^dag")


def make_gate(kind, wires: Sequence[int]) -> Gate:
    """Build a gate from a name in ``NAMED_GATES`` or an explicit matrix."""
    wires = tuple(int(w) for w in wires)
    if isinstance(kind, str):
        try:
            mat = NAMED_GATES[kind.upper()]
        except KeyError:
            raise DomainError(f"unknown gate name {kind!r}") from None
        name = kind.upper()
    else:
        mat = np.asarray(kind, dtype=complex)
        name = None
    if mat.shape != (2 ** len(wires), 2 ** len(wires)) or len(wires) not in (1, 2):
        raise DomainError(f"gate of shape {mat.shape} does not match wires {wires}")
    if len(set(wires)) != len(wires):
        raise DomainError(f"repeated wire in {wires}")
    if not np.allclose(mat.conj().T @ mat, np.eye(mat.shape[0]), atol=1e-12, rtol=0):
        raise DomainError(f"gate {name or 'matrix'} on {wires} is not unitary to 1e-12")
    return Gate(mat, wires, name)


@dataclass(frozen=True)
class GateCircuit:
    qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if not (1 <= self.qubits <= MAX_QUBITS):
            raise DomainError(f"qubit count {self.qubits} outside [1, {MAX_QUBITS}]")
        for g in self.gates:
            if any(not (0 <= w < self.qubits) for w in g.wires):
                raise DomainError(f"gate wires {g.wires} outside [0, {self.qubits})")

    def __len__(self):
        return len(self.gates)

    def repeat(self, times: int) -> "GateCircuit":
        return GateCircuit(self.qubits, self.gates * int(times))

    def run(self, state, start: int = 0, stop: int | None = None) -> np.ndarray:
        """Apply gates ``start+1 .. stop`` (1-based, inclusive) to ``state``."""
        stop = len(self.gates) if stop is None else stop
        out = np.asarray(state, dtype=complex)
        for g in self.gates[start:stop]:
            out = apply_gate(out, g, self.qubits)
        return out

    def unitary(self) -> np.ndarray:
        return self.run(np.eye(2**self.qubits, dtype=complex))

    def to_json_list(self) -> list:
        out = []
        for g in self.gates:
            if g.name is not None and not g.name.endswith("^dag"):
                out.append({"gate": g.name, "wires": list(g.wires)})
            else:
                mat = [[[float(z.real), float(z.imag)] for z in row] for row in g.matrix]
                out.append({"gate": mat, "wires": list(g.wires)})
        return out


def apply_gate(state: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to an n-qubit state; a trailing batch axis is allowed."""
    state = np.asarray(state)
    batch = state.shape[1:]
    psi = state.reshape((2,) * n + batch)
    k = gate.arity
    u = gate.matrix.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(gate.wires)))
    out = np.moveaxis(out, list(range(k)), list(gate.wires))
    return out.reshape(state.shape)


def embed(gate: Gate, n: int) -> np.ndarray:
    """Full 2^n x 2^n matrix of a gate."""
    return apply_gate(np.eye(2**n, dtype=complex), gate, n)


def basis_state(bits: str) -> np.ndarray:
    if set(bits) - {"0", "1"} or not bits:
        raise DomainError(f"not a bitstring: {bits!r}")
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def index_to_bits(index: int, n: int) -> str:
    return format(int(index), f"0{n}b")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_circuit(n: int, size: int, rng: np.random.Generator, p_two: float = 0.6) -> GateCircuit:
    """Haar-random 1- and 2-qubit gates on random wires."""
    gates = []
    for _ in range(size):
        if n >= 2 and rng.random() < p_two:
            a, b = rng.choice(n, size=2, replace=False)
            gates.append(Gate(haar_unitary(4, rng), (int(a), int(b))))
        else:
            gates.append(Gate(haar_unitary(2, rng), (int(rng.integers(n)),)))
    return GateCircuit(n, tuple(gates))


def _parse_matrix(raw):
    def entry(z):
        if isinstance(z, (list, tuple)):
            return complex(z[0], z[1])
        if isinstance(z, str):
            return complex(z.replace(" ", ""))
        return complex(z)

    return np.array([[entry(z) for z in row] for row in raw], dtype=complex)


def circuit_from_json(data, qubits: int | None = None) -> GateCircuit:
    """Parse ``[{"gate": name|matrix, "wires": [...]}, ...]``.

    A top-level object ``{"qubits": n, "gates": [...]}`` is accepted too.
    Matrix entries may be numbers, ``[re, im]`` pairs or complex strings.
    """
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    if isinstance(data, dict):
        qubits = data.get("qubits", qubits)
        data = data["gates"]
    gates = []
    for item in data:
        kind = item["gate"]
        if not isinstance(kind, str):
            kind = _parse_matrix(kind)
        gates.append(make_gate(kind, item["wires"]))
    if qubits is None:
        qubits = 1 + max((w for g in gates for w in g.wires), default=0)
    return GateCircuit(int(qubits), tuple(gates))

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from nofastforward.circuits import GateCircuit, basis_state, embed, haar_unitary, make_gate, random_circuit
from nofastforward.clock import build_clock
from nofastforward.errors import CapacityError, ConsistencyError, DomainError
from nofastforward.feynman import (
    HistoryState,
    LineClock,
    build_feynman_h,
    dense_evolve,
    evolve_restricted,
    johnson_clock_for,
    run_reduction_local,
    run_reduction_local_many,
    sample_clock_and_collapse,
)

NOT = GateCircuit(1, (make_gate("X", (0,)),))


def independent_dense(circuit, clock_dim, basis):
    """Sum_j U_j (x) |g_j><g_{j-1}| + h.c. from explicit kron products."""
    n = circuit.qubits
    h = np.zeros(((2**n) * clock_dim,) * 2, dtype=complex)
    for j, g in enumerate(circuit.gates, start=1):
        e = np.zeros((clock_dim, clock_dim))
        e[basis(j), basis(j - 1)] = 1
        term = np.kron(embed(g, n), e)
        h += term + term.conj().T
    return h


def test_identity_gate_single_qubit_pattern():
    c = GateCircuit(1, (make_gate("I", (0,)),))
    h = build_feynman_h(c, LineClock(2)).dense()
    flip = np.array([[0, 1], [1, 0]])
    np.testing.assert_array_equal(h, np.kron(np.eye(2), flip))


def test_dense_matches_independent_constructor_line_clock(rng):
    c = random_circuit(2, 3, rng)
    h = build_feynman_h(c, LineClock(4)).dense()
    np.testing.assert_allclose(h, independent_dense(c, 4, lambda j: j), atol=1e-14)


def test_johnson_dense_on_path_states(rng):
    """On the span of path states the Johnson clock acts like the one-hot clock."""
    c = random_circuit(2, 3, rng)
    clk = build_clock(4, 2)
    hf = build_feynman_h(c, clk)
    ref = independent_dense(c, 16, lambda j: clk.index_of(j + 1))
    hist = hf.history_states(basis_state("01"))
    np.testing.assert_allclose(hf.dense() @ hist.T, ref @ hist.T, atol=1e-14)


@pytest.mark.parametrize("use_johnson", [False, True])
def test_hermitian_and_matvec(rng, use_johnson):
    c = random_circuit(3, 5, rng)
    clk = johnson_clock_for(5) if use_johnson else LineClock(6)
    h = build_feynman_h(c, clk)
    d = h.dense()
    assert np.abs(d - d.conj().T).max() <= 1e-12
    v = rng.standard_normal(h.dim) + 1j * rng.standard_normal(h.dim)
    np.testing.assert_allclose(h.matvec(v), d @ v, atol=1e-12)


def test_clock_too_short():
    with pytest.raises(DomainError):
        build_feynman_h(NOT.repeat(4), LineClock(4))


def test_dense_cap():
    c = random_circuit(3, 40, np.random.default_rng(0))
    with pytest.raises(CapacityError):
        build_feynman_h(c, johnson_clock_for(40)).dense()


def test_restricted_t0():
    hs = evolve_restricted(NOT.repeat(5), "0", 0.0)
    np.testing.assert_allclose(hs.time_amplitudes, [1, 0, 0, 0, 0, 0], atol=1e-15)


def test_restricted_tail_40_vertices():
    hs = evolve_restricted(NOT.repeat(39), "0", 10.0)
    assert hs.probabilities[10:].sum() >= 1 / 3


def test_restricted_vs_dense(rng):
    c = random_circuit(2, 8, rng)
    for clk in (LineClock(9), johnson_clock_for(8)):
        h = build_feynman_h(c, clk)
        hist = h.history_states(basis_state("00"))
        out = expm(-1j * 3.0 * h.dense()) @ hist[0]
        np.testing.assert_allclose(hist.conj() @ out, evolve_restricted(c, "00", 3.0).time_amplitudes, atol=1e-8)


@given(st.integers(0, 2**31), st.floats(0, 8))
def test_subspace_closure(seed, t):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    c = random_circuit(n, int(rng.integers(1, 13)), rng)
    h = build_feynman_h(c, LineClock(len(c) + 1))
    hist = h.history_states(haar_unitary(2**n, rng)[:, 0])
    out = dense_evolve(h, hist[0], t)
    assert 1 - np.sum(np.abs(hist.conj() @ out) ** 2) <= 1e-9


@given(st.integers(1, 80), st.data())
def test_late_clock_mass(L, data):
    t = data.draw(st.floats(0, (L + 1) / 2))
    p = evolve_restricted(NOT.repeat(L), "0", t).probabilities
    # vertices l >= ceil(t) of the walk are clock times >= ceil(t) - 1
    assert p[max(math.ceil(t) - 1, 0):].sum() >= 1 / 3 - 1e-9


def test_dense_evolve_examples(rng):
    a = rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64))
    h = (a + a.conj().T) / 2
    v = rng.standard_normal(64) + 0j
    np.testing.assert_allclose(dense_evolve(h, v, 0.0), v, atol=1e-12)
    np.testing.assert_allclose(dense_evolve(h, v, 1.3), expm(-1.3j * h) @ v, atol=1e-9)
    lam = rng.standard_normal(64)
    np.testing.assert_allclose(dense_evolve(np.diag(lam), v, 0.7), np.exp(-0.7j * lam) * v, atol=1e-12)


def test_sample_collapse_trivial(rng):
    c = random_circuit(2, 4, rng)
    hs = HistoryState(np.eye(5)[0].astype(complex), basis_state("10"))
    l, phi = sample_clock_and_collapse(hs, c, rng)
    assert l == 0
    np.testing.assert_array_equal(phi, basis_state("10"))


def test_sample_collapse_deterministic_and_exact():
    c = random_circuit(2, 6, np.random.default_rng(1))
    hs = evolve_restricted(c, "00", 2.5)
    a = sample_clock_and_collapse(hs, c, np.random.default_rng(9))
    b = sample_clock_and_collapse(hs, c, np.random.default_rng(9))
    assert a[0] == b[0]
    np.testing.assert_array_equal(a[1], b[1])
    np.testing.assert_array_equal(a[1], c.run(basis_state("00"), 0, a[0]))


def test_sample_collapse_rejects_unnormalised(rng):
    hs = HistoryState(np.array([0.5, 0.5], dtype=complex), basis_state("0"))
    with pytest.raises(ConsistencyError):
        sample_clock_and_collapse(hs, NOT, rng)


def test_sample_frequencies():
    c = NOT.repeat(6)
    hs = evolve_restricted(c, "0", 2.0)
    rng = np.random.default_rng(3)
    p = hs.probabilities
    N = 100_000
    ls = rng.choice(p.size, size=N, p=p / p.sum())
    counts = np.bincount(ls, minlength=p.size)
    sigma = np.sqrt(N * p * (1 - p))
    assert np.all(np.abs(counts - N * p) <= 3 * sigma + 1e-9)
    # the public sampler draws from the same distribution
    single = [sample_clock_and_collapse(hs, c, rng)[0] for _ in range(3000)]
    freq = np.bincount(single, minlength=p.size) / 3000
    assert np.all(np.abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / 3000) + 1e-3)


def test_reduction_not_t0(rng):
    assert run_reduction_local(NOT, 4, 0.0, "0", rng) == (0, "0")


def test_reduction_not_parity():
    rng = np.random.default_rng(5)
    for t in np.linspace(0, 8, 9):
        for _ in range(20):
            m, x = run_reduction_local(NOT, 8, t, "0", rng)
            assert x == str(m % 2)


def test_reduction_classical_permutation():
    g = GateCircuit(3, (make_gate("X", (0,)), make_gate("CNOT", (0, 2)), make_gate("SWAP", (1, 2))))
    rng = np.random.default_rng(6)
    ms, xs = run_reduction_local_many(g, 10, 15.0, "011", rng, 400)
    for m, x in zip(ms, xs):
        state = basis_state("011")
        for _ in range(m):
            state = g.run(state)
        assert x == format(int(np.argmax(np.abs(state))), "03b")


def test_reduction_time_range(rng):
    with pytest.raises(DomainError):
        run_reduction_local(NOT, 4, 4.5, "0", rng)

"""Acceptance suite: thirteen numbered criteria, each a set of measured checks.

Every criterion returns a :class:`CriterionResult`; the report is what
``nofastforward acceptance`` writes. Thresholds can be overridden by name
(``tail_threshold`` and friends) to check that the suite can fail.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from math import comb

import numpy as np
from scipy.linalg import expm
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import bessel, chains, clock, feynman, sparse_oracle, timedep, walk
from .circuits import GateCircuit, basis_state, haar_unitary, make_gate, random_circuit

DEFAULTS = {
    "tail_threshold": 1.0 / 3.0,
    "head_threshold": 2.0 / math.pi,
    "image_tol": 1e-8,
    "bessel_form_tol": 1e-6,
    "wavefront_window": 3,
    "feynman_tol": 1e-8,
    "off_subspace_tol": 1e-9,
    "swap_tol": 1e-10,
    "piecewise_tol": 1e-9,
    "generator_tol": 1e-10,
    "F_constant": 1e4,
    "samples": 10_000,
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["criteria", "passed", "timestamp"],
    "properties": {
        "passed": {"type": "boolean"},
        "timestamp": {"type": "string"},
        "backend": {"type": "string"},
        "criteria": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "name", "measured", "threshold", "passed", "seconds", "checks"],
                "properties": {
                    "id": {"type": "integer", "minimum": 1},
                    "name": {"type": "string"},
                    "measured": {"type": "number"},
                    "threshold": {"type": "number"},
                    "passed": {"type": "boolean"},
                    "seconds": {"type": "number", "minimum": 0},
                    "checks": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["name", "measured", "threshold", "comparator", "passed"],
                            "properties": {
                                "name": {"type": "string"},
                                "measured": {"type": "number"},
                                "threshold": {"type": "number"},
                                "comparator": {"enum": ["<=", ">="]},
                                "passed": {"type": "boolean"},
                            },
                        },
                    },
                },
            },
        },
    },
}


@dataclass
class Check:
    name: str
    measured: float
    threshold: float
    comparator: str = "<="

    @property
    def passed(self) -> bool:
        if not math.isfinite(self.measured):
            return False
        if self.comparator == "<=":
            return bool(self.measured <= self.threshold)
        return bool(self.measured >= self.threshold)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "measured": float(self.measured),
            "threshold": float(self.threshold),
            "comparator": self.comparator,
            "passed": self.passed,
        }


@dataclass
class CriterionResult:
    id: int
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def headline(self) -> Check:
        return next((c for c in self.checks if not c.passed), self.checks[0])

    def to_json_dict(self) -> dict:
        h = self.headline
        return {
            "id": self.id,
            "name": self.name,
            "measured": float(h.measured),
            "threshold": float(h.threshold),
            "passed": self.passed,
            "seconds": float(self.seconds),
            "checks": [c.to_json_dict() for c in self.checks],
        }

    def line(self) -> str:
        h = self.headline
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.id:2d} {self.name}: {h.name} = {h.measured:.6g} "
            f"({h.comparator} {h.threshold:.6g}) in {self.seconds:.2f}s"
        )


def _sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


# -- criteria -----------------------------------------------------------------


def c1_tail_mass(cfg):
    tails, heads = [], []
    for L in (50, 100, 200):
        line = walk.build_line(L)
        for t in range(1, L // 2 + 1):
            probs = walk.prob_profile(line, t).probs
            tails.append(probs[t - 1 :].sum())
            heads.append(probs[:t].sum())
    return [
        Check("min tail mass", min(tails), cfg["tail_threshold"] - 1e-9, ">="),
        Check("max head mass", max(heads), cfg["head_threshold"] + 1e-6),
    ]


def c2_bessel_maxima(cfg):
    xs = np.linspace(0.0, 60.0, 60001)
    m1 = float(np.max(bessel.bessel_j_grid(1, xs) ** 2))
    m2 = float(np.max(bessel.bessel_j_grid(2, xs) ** 2))
    return [
        Check("|max J_1^2 - 0.339|", abs(m1 - 0.339), 0.002),
        Check("|max J_2^2 - 0.237|", abs(m2 - 0.237), 0.002),
    ]


def c3_tail_bound(cfg):
    rng = np.random.default_rng(cfg["seed"])
    worst = -np.inf
    for n in range(1, 101):
        xs = rng.uniform(2 * n, 4 * n, size=200)
        excess = bessel.bessel_j_grid(n, xs) ** 2 - bessel.tail_bound(n)
        worst = max(worst, float(excess.max()))
    return [Check("max J_n^2 - 2/(n pi)", worst, 1e-12)]


def c4_propagators(cfg):
    L = 100
    line = walk.build_line(L)
    img = bes = 0.0
    for t in range(1, 51):
        exact = walk.amplitudes(line, t, 1)
        for l in range(1, L + 1):
            img = max(img, abs(exact[l - 1] - walk.propagator_image_sum(L, l, t, m_max=2)))
            bes = max(bes, abs(exact[l - 1] - walk.propagator_bessel(l, t)))
    return [
        Check("max |exact - image sum|", img, cfg["image_tol"]),
        Check("max |exact - Bessel form|", bes, cfg["bessel_form_tol"]),
    ]


def c5_wavefront(cfg):
    line = walk.build_line(100)
    worst = 0
    for t in range(10, 51):
        peak = int(np.argmax(walk.prob_profile(line, t).probs)) + 1
        worst = max(worst, abs(peak - 2 * t))
    return [Check("max |argmax_l P - 2t|", worst, cfg["wavefront_window"])]


def c6_clock(cfg):
    bad = 0
    for n in range(2, 9):
        for k in range(1, n):
            clk = clock.build_clock(n, k)
            idx = np.array([clk.index_of(j) for j in range(1, clk.length + 1)])
            # consecutive subsets must differ by one exchange
            bad += sum(len(a ^ b) != 2 for a, b in zip(clk.path, clk.path[1:]))
            bad += len(set(idx.tolist())) != comb(n, k)
            for j in range(1, clk.length):
                cols = clk.transition_matrix(j)[:, idx]
                want = np.zeros_like(cols)
                want[idx[j], j - 1] = 1.0
                bad += int(not np.array_equal(cols, want))
    for c in range(2, 7):
        for T in range(1, 301):
            brute = next(m for m in range(1, 400) if comb(m, c - 1) >= T)
            bad += clock.min_clock_qubits(c, T) != brute
    return [Check("clock mismatches", bad, 0)]


def c7_feynman(cfg):
    rng = np.random.default_rng(cfg["seed"])
    amp_err = off = 0.0
    for i in range(20):
        n = int(rng.integers(1, 4))
        circ = random_circuit(n, int(rng.integers(1, 13)), rng)
        clk = feynman.LineClock(len(circ) + 1) if i % 2 else feynman.johnson_clock_for(len(circ))
        h = feynman.build_feynman_h(circ, clk)
        phi0 = haar_unitary(2**n, rng)[:, 0]
        hist = h.history_states(phi0)
        w, v = np.linalg.eigh(h.dense())
        c0 = v.conj().T @ hist[0]
        for t in np.arange(1, 13) / 2:
            out = v @ (np.exp(-1j * w * t) * c0)
            proj = hist.conj() @ out
            alpha = feynman.evolve_restricted(circ, phi0, t).time_amplitudes
            amp_err = max(amp_err, float(np.abs(proj - alpha).max()))
            off = max(off, float(abs(1.0 - np.sum(np.abs(proj) ** 2))))
    return [
        Check("max |dense - restricted|", amp_err, cfg["feynman_tol"]),
        Check("max off-subspace mass", off, cfg["off_subspace_tol"]),
    ]


_CLASSICAL = {
    "X": lambda b, w: b ^ {w[0]},
    "CNOT": lambda b, w: b ^ {w[1]} if w[0] in b else b,
    "SWAP": lambda b, w: (b - set(w)) | {w[1 - w.index(q)] for q in w if q in b},
}


def _classical_iterate(gates, bits, m):
    """g^(m)(x) by set-of-ones bit manipulation (independent of statevectors)."""
    ones = {i for i, c in enumerate(bits) if c == "1"}
    for _ in range(m):
        for name, wires in gates:
            ones = _CLASSICAL[name](ones, list(wires))
    return "".join("1" if i in ones else "0" for i in range(len(bits)))


REVERSIBLE_GADGETS = {
    "not": (1, [("X", (0,))], "0"),
    "perm3": (3, [("CNOT", (0, 1)), ("SWAP", (1, 2)), ("CNOT", (2, 0))], "100"),
}


def c8_reduction_r(cfg):
    rng = np.random.default_rng(cfg["seed"])
    T, N = 16, cfg["samples"]
    wrong, worst_margin = 0, np.inf
    for n, gates, x in REVERSIBLE_GADGETS.values():
        g = GateCircuit(n, tuple(make_gate(name, w) for name, w in gates))
        s = len(g)
        t = s * T / 2
        ms, xs = feynman.run_reduction_local_many(g, T, t, x, rng, N)
        expect = {m: _classical_iterate(gates, x, m) for m in set(ms.tolist())}
        wrong += sum(xm != expect[int(m)] for m, xm in zip(ms, xs))
        frac = float(np.mean(ms >= math.floor(t / s)))
        worst_margin = min(worst_margin, frac - (1 / 3 - 3 * _sigma(1 / 3, N)))
    return [
        Check("outputs differing from g^(m)(x)", wrong, 0),
        Check("min Pr[m >= floor(t/s)] - (1/3 - 3 sigma)", worst_margin, 0.0, ">="),
    ]


def _random_circuits(seed, count=50):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 6))
        out.append(random_circuit(n, int(rng.integers(1, 11)), rng))
    return out, rng


def c9_swap_network(cfg):
    circs, rng = _random_circuits(cfg["seed"])
    err = 0.0
    nonlocal_gates = 0
    for c in circs:
        geo = timedep.to_geometrically_local(c)
        nonlocal_gates += sum(g.arity == 2 and abs(g.wires[0] - g.wires[1]) != 1 for g in geo.circuit.gates)
        for _ in range(10):
            x = haar_unitary(2**c.qubits, rng)[:, 0]
            err = max(err, float(np.abs(geo.circuit.run(x) - geo.to_physical(c.run(x))).max()))
    return [
        Check("max |C'(x) - pi C(x)|", err, cfg["swap_tol"]),
        Check("non-adjacent gates", nonlocal_gates, 0),
    ]


def c10_piecewise(cfg):
    circs, rng = _random_circuits(cfg["seed"])
    err = gen = 0.0
    for c in circs:
        ph = timedep.to_piecewise(c)
        x = haar_unitary(2**c.qubits, rng)[:, 0]
        for i in range(len(c) + 1):
            err = max(err, float(np.abs(timedep.evolve_piecewise(ph, x, i) - c.run(x, 0, i)).max()))
        for seg in ph.segments:
            gen = max(gen, float(np.abs(expm(-1j * seg.generator) - seg.unitary).max()))
    return [
        Check("max |piecewise(i) - U_i..U_1 x|", err, cfg["piecewise_tol"]),
        Check("max |exp(-iG) - U|", gen, cfg["generator_tol"]),
    ]


def c11_oracle_family(cfg):
    bad = {"involution": 0, "support": 0, "nesting": 0, "census": 0, "repair": 0}
    for seed in range(20):
        n, L = seed % 8 + 1, seed % 6 + 1
        fam = chains.gen_family(cfg["seed"] * 1000 + seed, L, n)
        rnd = chains.gen_family(cfg["seed"] * 1000 + seed + 500, L, n)
        N, bot = 1 << n, chains.bottom(n)
        rng = np.random.default_rng(seed)
        xs = range(N)
        for j in range(1, L + 1):
            for x in xs:
                r = int(rng.integers(0, 2 * N))
                y = chains.spi_apply(fam, j, x, 0)
                bad["involution"] += chains.spi_apply(fam, j, x, chains.spi_apply(fam, j, x, r)) != r
                bad["involution"] += chains.spi_apply(fam, -j, y, 0) != x
            for sign in (1, -1):
                words = [chains.erased_word(fam, sign * j, x) for x in xs]
                bad["support"] += sum(w != bot for w in words) != 1
        table = {(ell, j, x): chains.hybrid_apply(fam, ell, j, x, 0)
                 for ell in range(L + 1) for j in list(range(-L, 0)) + list(range(1, L + 1)) for x in xs}
        for ell in range(L + 1):
            for ell2 in range(ell, L + 1):
                for j in range(1, ell + 1):
                    for x in xs:
                        bad["nesting"] += table[(ell, j, x)] != table[(ell2, j, x)]
                        bad["nesting"] += table[(ell, -j, x)] != table[(ell2, -j, x)]
        merged = chains.merge_random(fam, rnd)
        census = chains.collision_census(merged)
        chain = fam.chain
        for i in range(1, L + 1):
            want = int(rnd.apply(i, int(chain[i - 1])) != chain[i])
            bad["census"] += census[i - 1] != want
        rep = chains.repair_to_permutation(merged)
        bad["repair"] += not rep.is_bijective()
        bad["repair"] += sum(rep.apply(i, int(chain[i - 1])) != chain[i] for i in range(1, L + 1))
    return [Check(f"{k} failures", v, 0) for k, v in bad.items()]


def c12_twisted(cfg):
    rng = np.random.default_rng(cfg["seed"])
    bad = 0
    for i in range(100):
        n = int(rng.integers(4, 17))
        h = chains.random_hash(cfg["seed"] * 1000 + i, n)
        x0 = int(rng.integers(0, 1 << n))
        q = int(rng.integers(1, 17))
        honest = chains.twisted_extend(h, x0, q + 1)
        ch, tr, hq = chains.complete_chain_D(h, x0, honest[q], honest[q + 1], q)
        bad += len(ch.elements) != 2 * q + 2
        bad += bool(ch.violations(h, {ch[q]: hq}))
        bad += hq != int(h[ch[q]])
        bad += tr.depth != q or any(w != 2 for w in tr.widths)
    Y = 1 << 20
    ratio = max(
        chains.bound_F(k, 2 * q, Y) * Y / (k**4 * q**4) for k in range(1, 65) for q in range(1, 65)
    )
    return [
        Check("completion failures", bad, 0),
        Check("max F(k,2q)|Y| / (k^4 q^4)", ratio, cfg["F_constant"]),
    ]


def c13_sparse_oracle(cfg):
    bad = {"oracle/dense": 0, "sparsity": 0, "paths": 0}
    for seed in range(20):
        n, L = seed % 3 + 1, seed % 4 + 1
        wgh = sparse_oracle.WalkGraphHamiltonian(chains.gen_family(cfg["seed"] * 1000 + seed, L, n))
        H = sparse_oracle.materialize(wgh)
        D = wgh.dim
        for a in range(D):
            u = wgh.vertex(a)
            for b in range(D):
                bad["oracle/dense"] += sparse_oracle.entry_oracle(wgh, u, wgh.vertex(b)) != H[b, a]
            nbrs = sorted(wgh.index(sparse_oracle.structure_oracle(wgh, u, s)) for s in sparse_oracle.slots(wgh, u))
            bad["oracle/dense"] += nbrs != np.flatnonzero(H[:, a]).tolist()
        rows = H.sum(axis=1)
        bad["sparsity"] += int(rows.max() > 2 or rows.min() < 1 or not np.array_equal(H, H.T))
        ncomp, labels = connected_components(csr_matrix(H), directed=False)
        sizes = np.bincount(labels)
        edges = np.bincount(labels, weights=rows) / 2
        bad["paths"] += int(ncomp != 1 << n or (sizes != L + 1).any() or (edges != L).any())
    checks = [Check(f"{k} failures", v, 0) for k, v in bad.items()]

    N = cfg["samples"]
    wgh = sparse_oracle.WalkGraphHamiltonian(chains.gen_family(cfg["seed"], 40, 8))
    qs, xs, tr = sparse_oracle.run_reduction_oracle_many(wgh, 10.0, np.random.default_rng(cfg["seed"]), N)
    truth = np.array([chains.chain_point(wgh.family, q, 0).value for q in range(41)])
    checks.append(Check("samples with x_q != f^(q)(0)", int(np.sum(truth[qs] != xs)), 0))
    frac = float(np.mean(qs > 10))
    checks.append(Check("Pr[q > t] - (1/3 - 3 sigma)", frac - (1 / 3 - 3 * _sigma(1 / 3, N)), 0.0, ">="))
    checks.append(Check("reduction transcript depth", tr.depth, 40))
    return checks


CRITERIA = [
    (1, "tail mass", c1_tail_mass),
    (2, "Bessel maxima", c2_bessel_maxima),
    (3, "Bessel tail bound", c3_tail_bound),
    (4, "propagator equivalence", c4_propagators),
    (5, "wavefront location", c5_wavefront),
    (6, "clock correctness", c6_clock),
    (7, "Feynman restriction", c7_feynman),
    (8, "reduction R", c8_reduction_r),
    (9, "swap-network identity", c9_swap_network),
    (10, "piecewise evolution", c10_piecewise),
    (11, "oracle family", c11_oracle_family),
    (12, "twisted-chain reduction", c12_twisted),
    (13, "sparse-oracle consistency", c13_sparse_oracle),
]


def run_criterion(cid: int, seed: int = 0, overrides: dict | None = None) -> CriterionResult:
    cfg = dict(DEFAULTS, seed=seed, **(overrides or {}))
    _, name, fn = next(c for c in CRITERIA if c[0] == cid)
    t0 = time.perf_counter()
    checks = fn(cfg)
    return CriterionResult(cid, name, checks, time.perf_counter() - t0)


def run_all(seed: int = 0, overrides: dict | None = None, only=None) -> list[CriterionResult]:
    ids = [c[0] for c in CRITERIA] if only is None else list(only)
    return [run_criterion(cid, seed, overrides) for cid in ids]


def report(results: list[CriterionResult]) -> dict:
    from ._kernels import BACKEND

    return {
        "criteria": [r.to_json_dict() for r in results],
        "passed": all(r.passed for r in results),
        "backend": BACKEND,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }

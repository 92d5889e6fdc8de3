"""Command-line drivers.

Every command is deterministic given its flags and ``--seed``. Output goes to
``--out`` (default stdout) as CSV with a header row or as JSON. Floats are
written in shortest round-trip form.

Exit codes: 0 success, 1 criterion failure, 2 usage error, 3 internal
consistency error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import acceptance, bessel, chains, clock, feynman, sparse_oracle, timedep, walk
from .circuits import GateCircuit, circuit_from_json, make_gate
from .errors import ConsistencyError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONSISTENCY = 0, 1, 2, 3


class CommandFailed(Exception):
    """A command ran to completion but its check did not pass."""


# -- output ------------------------------------------------------------------


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return "" if v is None else str(v)


def render(rows: list[dict], payload, fmt: str) -> str:
    """CSV from ``rows`` or JSON from ``payload``."""
    if fmt == "json":
        return json.dumps(payload, default=_json_default) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(rows[0]))
        for r in rows:
            w.writerow([_cell(v) for v in r.values()])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def emit(args, rows, payload):
    text = render(rows, payload, args.format)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


# -- argument helpers ----------------------------------------------------------


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _grid(s: str) -> np.ndarray:
    start, stop, step = (float(v) for v in s.split(":"))
    if step <= 0 or stop < start:
        raise DomainError(f"bad grid {s!r}; want start:stop:step with step > 0")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


GADGETS = acceptance.REVERSIBLE_GADGETS


def _load_gadget(args) -> tuple[GateCircuit, str]:
    if args.circuit:
        with open(args.circuit) as fh:
            circ = circuit_from_json(json.load(fh))
        return circ, args.input or "0" * circ.qubits
    n, gates, x = GADGETS[args.gadget]
    return GateCircuit(n, tuple(make_gate(name, w) for name, w in gates)), args.input or x


# -- commands ------------------------------------------------------------------


def cmd_walk_profile(args):
    line = walk.build_line(args.L)
    ts = _floats(args.t)
    profiles = [walk.prob_profile(line, t) for t in ts]
    rows = [
        {"series": "profile", "t": float(p.time), "l": l, "prob": float(v)}
        for p in profiles
        for l, v in enumerate(p.probs, start=1)
    ]
    series = []
    if args.t_grid:
        grid = _grid(args.t_grid)
        verts = _ints(args.vertices) if args.vertices else sorted({1, args.L // 4 or 1, args.L // 2 or 1, 3 * args.L // 4 or 1, args.L})
        for l in verts:
            probs = walk.prob_vs_time(line, l, grid)
            series.append({"l": l, "t": grid.tolist(), "probs": probs.tolist()})
            rows.extend({"series": "time", "t": float(t), "l": l, "prob": float(p)} for t, p in zip(grid, probs))
    emit(args, rows, {"L": args.L, "profiles": [p.to_json_dict() for p in profiles], "series": series})


def cmd_walk_tail(args):
    line = walk.build_line(args.L)
    ts = _floats(args.t) if args.t else list(range(1, args.L // 2 + 1))
    rows = [{"L": args.L, "t": float(t), "tail": walk.tail_mass(line, t), "head": walk.head_mass(line, t)} for t in ts]
    emit(args, rows, {"L": args.L, "rows": rows})


def cmd_bessel_bounds(args):
    rng = np.random.default_rng(args.seed)
    rows = []
    for n in range(1, args.n_max + 1):
        xs = np.sort(rng.uniform(2 * n, 4 * n, size=args.samples))
        vals = bessel.bessel_j_grid(n, xs) ** 2
        for x, v in zip(xs, vals):
            try:
                kra = bessel.kra_bound(n, float(x))
            except DomainError:
                kra = None
            rows.append({"n": n, "x": float(x), "jn_sq": float(v), "tail_bound": bessel.tail_bound(n), "kra_bound": kra})
    emit(args, rows, {"rows": rows})


def cmd_clock_verify(args):
    clk = clock.build_clock(args.n, args.k)
    rows = []
    ok_all = True
    for j in range(1, clk.length + 1):
        ok = True
        if j < clk.length:
            m = clk.transition_map(j)
            idx = [clk.index_of(i) for i in range(1, clk.length + 1)]
            ok = all((m[c] == idx[j]) if i == j - 1 else (m[c] < 0) for i, c in enumerate(idx))
        ok_all &= ok
        rows.append({"n": args.n, "k": args.k, "length": clk.length, "j": j, "encoding": clk.encoding(j), "transition_ok": ok})
    payload = dict(clk.to_json_dict(), length=clk.length, locality=clk.locality, verified=ok_all)
    emit(args, rows, payload)
    if not ok_all:
        raise CommandFailed("clock transition check failed")


def _reduction_rows(ms, xs):
    return [{"sample": i, "m": int(m), "x_m": x} for i, (m, x) in enumerate(zip(ms, xs))]


def cmd_feynman_run(args):
    g, x = _load_gadget(args)
    t = args.t if args.t is not None else len(g) * args.T / 2
    rng = np.random.default_rng(args.seed)
    ms, xs = feynman.run_reduction_local_many(g, args.T, t, x, rng, args.samples)
    emit(args, _reduction_rows(ms, xs), {"s": len(g), "T": args.T, "t": t, "input": x, "m": ms.tolist(), "x_m": xs})


def cmd_timedep_run(args):
    g, x = _load_gadget(args)
    s = len(g)
    total = g.qubits * s * args.T
    t = args.t if args.t is not None else total / 2
    rng = np.random.default_rng(args.seed)
    ms, xs = [], []
    for _ in range(args.samples):
        m, xm = timedep.run_reduction_dep(g, args.T, t, x, rng)
        ms.append(m)
        xs.append(xm)
    if args.export_hamiltonian:
        geo = timedep.to_geometrically_local(g.repeat(args.T), block_size=s)
        with open(args.export_hamiltonian, "w") as fh:
            json.dump(timedep.to_piecewise(geo.circuit).to_json_dict(), fh)
    emit(args, _reduction_rows(ms, xs), {"s": s, "T": args.T, "t": t, "input": x, "m": ms, "x_m": xs})


def cmd_chain(args):
    if args.action == "gen":
        fam = chains.gen_family(args.seed, args.L, args.n, args.start)
        rows = [{"q": q, "point": int(v)} for q, v in enumerate(fam.chain)]
        emit(args, rows, fam.to_json_dict())
        return
    h = chains.random_hash(args.seed, args.n)
    if args.action == "verify":
        ok = chains.twisted_verify(h, args.x0, args.xq, args.xq1, args.q)
        payload = {"seed": args.seed, "n": args.n, "x0": args.x0, "q": args.q, "xq": args.xq, "xq1": args.xq1, "valid": ok}
        emit(args, [payload], payload)
        if not ok:
            raise CommandFailed("triple does not lie on the chain")
        return
    honest = chains.twisted_extend(h, args.x0, args.q + 1)
    xq = honest[args.q] if args.xq is None else args.xq
    xq1 = honest[args.q + 1] if args.xq1 is None else args.xq1
    chain, tr, hq = chains.complete_chain_D(h, args.x0, xq, xq1, args.q)
    bad = chain.violations(h, {chain[args.q]: hq})
    rows = [{"i": i, "x": v} for i, v in enumerate(chain.elements)]
    payload = {
        "seed": args.seed,
        "n": args.n,
        "q": args.q,
        "points": list(chain.elements),
        "h_prime_xq": hq,
        "valid": not bad,
        "transcript": tr.to_json_dict(),
    }
    emit(args, rows, payload)


def cmd_oracle_check(args):
    fam = chains.gen_family(args.seed, args.L, args.n)
    wgh = sparse_oracle.WalkGraphHamiltonian(fam)
    H = sparse_oracle.materialize(wgh)
    mismatch = 0
    for a in range(wgh.dim):
        u = wgh.vertex(a)
        col = [sparse_oracle.entry_oracle(wgh, u, wgh.vertex(b)) for b in range(wgh.dim)]
        mismatch += int(np.sum(np.array(col) != H[:, a]))
        nbrs = sorted(wgh.index(sparse_oracle.structure_oracle(wgh, u, s)) for s in sparse_oracle.slots(wgh, u))
        mismatch += nbrs != np.flatnonzero(H[:, a]).tolist()
    rows_nnz = H.sum(axis=1)
    checks = {
        "dim": wgh.dim,
        "mismatches": mismatch,
        "max_row_nnz": int(rows_nnz.max()),
        "min_row_nnz": int(rows_nnz.min()),
        "symmetric": bool(np.array_equal(H, H.T)),
    }
    if args.coo:
        with open(args.coo, "w") as fh:
            fh.write(sparse_oracle.coo_text(H))
    emit(args, [checks], checks)
    if mismatch or not checks["symmetric"] or checks["max_row_nnz"] > 2:
        raise CommandFailed("oracle and dense matrix disagree")


def cmd_acceptance(args):
    overrides = {}
    if args.tail_threshold is not None:
        overrides["tail_threshold"] = args.tail_threshold
    if args.samples is not None:
        overrides["samples"] = args.samples
    only = _ints(args.only) if args.only else None
    results = []
    for cid in only or [c[0] for c in acceptance.CRITERIA]:
        r = acceptance.run_criterion(cid, args.seed, overrides)
        print(r.line(), file=sys.stderr)
        results.append(r)
    rep = acceptance.report(results)
    rows = [{k: v for k, v in c.items() if k != "checks"} for c in rep["criteria"]]
    emit(args, rows, rep)
    if not rep["passed"]:
        raise CommandFailed("acceptance criteria failed")


# -- parser --------------------------------------------------------------------


def _global_flags(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    p.add_argument("--out", default=d(None), help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nofastforward", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("walk-profile", cmd_walk_profile, "P(1,l,t) profiles and fixed-vertex time series")
    p.add_argument("--L", type=int, default=100)
    p.add_argument("--t", default="10,20,30,40,50", help="comma-separated times")
    p.add_argument("--t-grid", help="start:stop:step for the time series")
    p.add_argument("--vertices", help="comma-separated vertices for the time series")

    p = add("walk-tail", cmd_walk_tail, "tail and head masses")
    p.add_argument("--L", type=int, default=100)
    p.add_argument("--t", help="comma-separated times (default 1..L/2)")

    p = add("bessel-bounds", cmd_bessel_bounds, "J_n(x)^2 against the tail and Krasikov bounds")
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--samples", type=int, default=5)

    p = add("clock-verify", cmd_clock_verify, "check a Johnson clock's transitions")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--k", type=int, default=2)

    for name, fn, what in (
        ("feynman-run", cmd_feynman_run, "clock-Hamiltonian reduction on an iterated circuit"),
        ("timedep-run", cmd_timedep_run, "time-dependent reduction on an iterated circuit"),
    ):
        p = add(name, fn, what)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--circuit", help="circuit JSON file")
        src.add_argument("--gadget", choices=sorted(GADGETS), default="not")
        p.add_argument("--T", type=int, default=16)
        p.add_argument("--t", type=float, help="evolution time (default half the total)")
        p.add_argument("--input", help="input bitstring")
        p.add_argument("--samples", type=int, default=10)
        if name == "timedep-run":
            p.add_argument("--export-hamiltonian", help="write the piecewise Hamiltonian as JSON")

    p = add("chain", cmd_chain, "permutation and twisted hash chains")
    p.add_argument("action", choices=("gen", "verify", "complete"))
    p.add_argument("--L", type=int, default=8)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--x0", type=int, default=0)
    p.add_argument("--q", type=int, default=4)
    p.add_argument("--xq", type=int)
    p.add_argument("--xq1", type=int)

    p = add("oracle-check", cmd_oracle_check, "entry/structure oracles against the dense matrix")
    p.add_argument("--L", type=int, default=4)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--coo", help="write the dense matrix as row col value lines")

    p = add("acceptance", cmd_acceptance, "run the acceptance criteria")
    p.add_argument("--only", help="comma-separated criterion ids")
    p.add_argument("--tail-threshold", type=float, help=argparse.SUPPRESS)
    p.add_argument("--samples", type=int, help="sample count for the sampling criteria")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "chain" and args.action == "verify" and (args.xq is None or args.xq1 is None):
        parser.error("chain verify needs --xq and --xq1")
    try:
        args.func(args)
    except CommandFailed as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (DomainError, OSError) as e:
        print(f"{args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as e:
        print(f"{args.command}: internal consistency error: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Numba vs NumPy kernel timings.

Runs each hot kernel from both backends on the same inputs, checks that the
results agree, and prints best-of-N wall times. The numba column excludes
the first (compiling) call.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from nofastforward import _kernels


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    rng = np.random.default_rng(0)
    xs = np.linspace(0.0, 60.0, 60001)
    draws = rng.integers(0, np.arange(1, (1 << 18) + 1))
    table = rng.integers(0, 1 << 16, size=1 << 16)
    return {
        "jn_many J_1 on 60001 points": ("jn_many", (1, xs)),
        "jn_many J_40 on 60001 points": ("jn_many", (40, xs)),
        "jn_orders 0..600 at x=200": ("jn_orders", (600, 200.0)),
        "line_amplitudes L=4096, t=1000": ("line_amplitudes", (4096, 1, 1000.0)),
        "fisher_yates N=2^18": ("fisher_yates", (draws,)),
        "twisted_chain 10^5 steps": ("twisted_chain", (table, 7, 100_000)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-14)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _kernels.NUMBA_KERNELS is None:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':34s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  agree")
    for label, (name, argv) in cases().items():
        t_np, out_np = best_of(lambda: _kernels.NUMPY_KERNELS[name](*argv), args.repeat)
        if _kernels.NUMBA_KERNELS is None:
            print(f"{label:34s} {1e3 * t_np:11.2f}")
            continue
        nb = _kernels.NUMBA_KERNELS[name]
        nb(*argv)  # compile
        t_nb, out_nb = best_of(lambda: nb(*argv), args.repeat)
        print(f"{label:34s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:7.1f}x  {_same(out_np, out_nb)}")


if __name__ == "__main__":
    main()

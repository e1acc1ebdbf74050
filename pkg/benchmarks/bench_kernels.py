#!/usr/bin/env python3
"""Time the Bethe-equation kernels: numba-compiled loops against numpy.

    python3 benchmarks/bench_kernels.py [--sizes 4 16 64 256] [--repeat 200]

Compilation happens in a warm-up call and is excluded from the timings.
With GAUDIN_OPERS_DISABLE_NUMBA=1 the loop kernels run as plain Python.
"""

import argparse
import time

import numpy as np

from gaudin_opers import kernels
from gaudin_opers.rootdata import load_cartan


def make_args(m, rng, rank=2, sites=6):
    A = load_cartan(f"A{rank}").entries.astype(np.float64)
    w = rng.normal(size=m) + 1j * rng.normal(size=m)
    colors = rng.integers(0, rank, size=m).astype(np.int64)
    z = 3 * (rng.normal(size=sites) + 1j * rng.normal(size=sites))
    pair = rng.integers(0, 3, size=(sites, rank)).astype(np.float64)
    return w, colors, z, pair, A


def bench(func, args, repeat):
    func(*args)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeat):
        func(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 16, 64, 256])
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)

    print(f"numba available: {kernels.HAVE_NUMBA}  (dispatch backend: {kernels.BACKEND})")
    print(f"{'kernel':<16}{'m':>6}{'numpy [us]':>14}{'loops [us]':>14}{'speedup':>10}{'max diff':>12}")
    pairs = [
        ("residual", kernels.bae_residual_numpy, kernels.bae_residual_loops),
        ("jacobian", kernels.bae_jacobian_numpy, kernels.bae_jacobian_loops),
    ]
    for m in args.sizes:
        a = make_args(m, rng)
        repeat = max(3, args.repeat // max(1, m // 16)) if not kernels.HAVE_NUMBA else args.repeat
        for name, f_np, f_loop in pairs:
            diff = np.abs(f_np(*a) - f_loop(*a)).max()
            t_np = bench(f_np, a, repeat)
            t_loop = bench(f_loop, a, repeat)
            print(f"{name:<16}{m:>6}{t_np * 1e6:>14.1f}{t_loop * 1e6:>14.1f}{t_np / t_loop:>10.2f}{diff:>12.2e}")
        sep_args = (a[0], a[2])
        t_np = bench(kernels.min_separation_numpy, sep_args, repeat)
        t_loop = bench(kernels.min_separation_loops, sep_args, repeat)
        print(f"{'min_separation':<16}{m:>6}{t_np * 1e6:>14.1f}{t_loop * 1e6:>14.1f}{t_np / t_loop:>10.2f}{'':>12}")


if __name__ == "__main__":
    main()

"""Throughput comparison of the compiled and fallback step kernels.

Run:  python benchmarks/bench_kernels.py [n_particles] [n_steps]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from degenlab.kernels import get_backends
from degenlab.rng import stream_keys


def bench_1d(impl, n, steps):
    keys = stream_keys(1234, np.arange(n))
    x = np.full(n, 0.5)
    t0 = time.perf_counter()
    for s in range(steps):
        impl.step_chunk_1d(x, keys, s, 0.5, 2.0, 2.0**-10, 0.01, 0.99)
    dt = time.perf_counter() - t0
    return dt, x


def bench_2d(impl, n, steps):
    keys = stream_keys(1234, np.arange(n))
    x = np.full(n, 0.1)
    y = np.full(n, 0.1)
    t0 = time.perf_counter()
    for s in range(steps):
        impl.step_chunk_2d(x, y, keys, s, 1.0, 2.0, 1.0, 2.0**-9)
    dt = time.perf_counter() - t0
    return dt, x


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 50_000
    steps = int(sys.argv[2]) if len(sys.argv) > 2 else 200
    backends = get_backends()
    print(f"{n} particles x {steps} steps  ({n * steps / 1e6:.1f}M particle-steps)")
    results = {}
    for name, impl in backends.items():
        t1, x1 = bench_1d(impl, n, steps)
        t2, _ = bench_2d(impl, n, steps)
        results[name] = (t1, x1)
        print(f"  {name:8s}  1d: {t1:7.3f}s ({n * steps / t1 / 1e6:7.1f}M steps/s)   "
              f"2d: {t2:7.3f}s ({n * steps / t2 / 1e6:7.1f}M steps/s)")
    if len(results) == 2:
        (tp, xp), (tc, xc) = results["python"], results["cython"]
        print(f"  speedup (1d): {tp / tc:.1f}x   max final-state diff: "
              f"{np.max(np.abs(xp - xc)):.3g}")


if __name__ == "__main__":
    main()

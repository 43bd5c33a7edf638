#!/usr/bin/env python3
"""Benchmark the compiled quadrature kernels against the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the Volterra product-integration solve and the two-time tensor
quadrature at several grid sizes on a Lorentzian kernel. The compiled
extension is imported directly (independent of CPFSIM_PURE_PYTHON), so the
comparison runs in one process.
"""
import argparse
import time

import numpy as np

from cpfsim import _kernels_py
from cpfsim.bath import LorentzianKernel, eval_kernel_grid

try:
    from cpfsim import _kernels

    HAVE_EXT = True
except ImportError:
    _kernels = None
    HAVE_EXT = False


def best_of(repeats, fn, *args):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_volterra(repeats):
    print("volterra_trapezoid (G grid points, seconds, best of "
          f"{repeats}; gamma tau_c = 1, h = tau_c/100 scaled)")
    header = f"{'n':>8} {'numpy':>12} {'cython':>12} {'speedup':>9} {'max|diff|':>11}"
    print(header)
    for n in (1000, 2000, 5000, 10000):
        h = 50.0 / n
        f = eval_kernel_grid(LorentzianKernel(1.0, 1.0), np.arange(n + 1) * h)
        t_py, g_py = best_of(repeats, _kernels_py.volterra_trapezoid, f, h)
        if HAVE_EXT:
            t_cy, g_cy = best_of(repeats, _kernels.volterra_trapezoid, f, h)
            diff = np.max(np.abs(g_py - g_cy))
            print(f"{n:>8} {t_py:>12.4f} {t_cy:>12.4f} {t_py / t_cy:>8.1f}x {diff:>11.2e}")
        else:
            print(f"{n:>8} {t_py:>12.4f} {'-':>12} {'-':>9} {'-':>11}")


def bench_two_time(repeats):
    print("\ntwo_time_trapezoid (n x n surface, seconds, best of "
          f"{repeats})")
    header = f"{'n':>8} {'numpy':>12} {'cython':>12} {'speedup':>9} {'max|diff|':>11}"
    print(header)
    for n in (200, 400, 800):
        h = 5.0 / n
        f = eval_kernel_grid(LorentzianKernel(1.0, 1.0), np.arange(2 * n + 1) * h)
        g = _kernels_py.volterra_trapezoid(f[: n + 1], h)
        t_py, s_py = best_of(repeats, _kernels_py.two_time_trapezoid, f, g, g, h)
        if HAVE_EXT:
            t_cy, s_cy = best_of(repeats, _kernels.two_time_trapezoid, f, g, g, h)
            diff = np.max(np.abs(s_py - s_cy))
            print(f"{n:>8} {t_py:>12.4f} {t_cy:>12.4f} {t_py / t_cy:>8.1f}x {diff:>11.2e}")
        else:
            print(f"{n:>8} {t_py:>12.4f} {'-':>12} {'-':>9} {'-':>11}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    if not HAVE_EXT:
        print("compiled extension not available; benchmarking numpy fallback only\n")
    bench_volterra(args.repeats)
    bench_two_time(args.repeats)


if __name__ == "__main__":
    main()

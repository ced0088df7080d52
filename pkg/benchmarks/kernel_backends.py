"""Benchmark the compiled spline kernels against the pure-Python fallback.

Times the two hot operations (single-point basis derivatives and batched
grid evaluation) on identical inputs and prints one CSV table.  Run:

    python3 benchmarks/kernel_backends.py [--repeats 5]

The package picks the compiled backend automatically; this script loads
both modules directly so one process measures both.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tjplan.spline import _kernels_py

try:
    from tjplan.spline import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_inputs(spans: int, grid_points: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    widths = rng.uniform(0.2, 2.0, size=spans)
    breaks = np.concatenate([[0.0], np.cumsum(widths)])
    knots = np.concatenate([np.zeros(5), breaks, np.full(5, breaks[-1])])
    times = np.sort(rng.uniform(0.0, breaks[-1], size=grid_points))
    return knots, times


def time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(kernels, knots, times, repeats: int):
    def single_point():
        for t in times:
            kernels.ders_basis(knots, 5, float(t), 3)

    def grid():
        kernels.basis_grid(knots, 5, times, 3)

    return time_call(single_point, repeats), time_call(grid, repeats)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print("backend,spans,grid_points,ders_basis_s,basis_grid_s,speedup_grid")
    for spans, grid_points in ((5, 200), (23, 1000), (47, 5000)):
        knots, times = make_inputs(spans, grid_points)
        py_single, py_grid = bench_backend(
            _kernels_py, knots, times, args.repeats
        )
        print(
            f"python,{spans},{grid_points},{py_single:.6f},{py_grid:.6f},1.00"
        )
        if _kernels_cy is not None:
            cy_single, cy_grid = bench_backend(
                _kernels_cy, knots, times, args.repeats
            )
            print(
                f"cython,{spans},{grid_points},{cy_single:.6f},"
                f"{cy_grid:.6f},{py_grid / cy_grid:.2f}"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

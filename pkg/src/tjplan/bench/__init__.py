"""Benchmark harness and rendering."""

from tjplan.bench.compare import (
    BenchProblem,
    BenchReport,
    BenchRow,
    bench_compare,
    problem_hash,
)
from tjplan.bench.render import sample_trajectory, trajectory_csv, trajectory_svg

__all__ = [
    "BenchProblem",
    "BenchReport",
    "BenchRow",
    "bench_compare",
    "problem_hash",
    "sample_trajectory",
    "trajectory_csv",
    "trajectory_svg",
]

"""Paired cold-start vs warm-start benchmark.

Every problem is solved by each method with identical waypoints,
limits, balancing parameter, and solver settings; the pairing is
asserted by a hash over exactly those inputs.  Iteration counts carry
the comparison (hardware-independent); wall times are recorded
separately so the main report stays byte-deterministic.
"""

from __future__ import annotations

import hashlib
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from tjplan.exceptions import PlanningFailedError
from tjplan.plan import (
    PlanRequest,
    cold_start,
    decode,
    plan,
    warm_start_from_model,
)
from tjplan.plan.planner import dense_feasibility_check
from tjplan.spline.functionals import scalar_objective, total_jerk
from tjplan.spline.serialize import format_float
from tjplan.spline.types import RobotLimits, WaypointPath
from tjplan.sqp import SqpSettings

METHODS = ("cold-sqp", "warm-sqp", "model-only")

ROW_HEADER = (
    "problem,length,method,pair_hash,converged,feasible,iterations,"
    "objective,jerk,duration"
)
AGGREGATE_HEADER = (
    "method,length,count,median_iterations,iqr_iterations,"
    "median_objective,iqr_objective"
)
TIMING_HEADER = "problem,method,init_ns,solve_ns"


@dataclass(frozen=True)
class BenchProblem:
    path: WaypointPath
    limits: RobotLimits
    lam: float
    collocation_density: int = 5
    margin: float = 0.99


@dataclass(frozen=True)
class BenchRow:
    problem: int
    length: int
    method: str
    pair_hash: str
    converged: bool
    feasible: bool
    iterations: int
    objective: float
    jerk: float
    duration: float
    init_ns: int
    solve_ns: int


@dataclass(frozen=True)
class BenchReport:
    rows: tuple
    aggregates: tuple = field(default=())

    def rows_csv(self) -> str:
        lines = [ROW_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.problem},{r.length},{r.method},{r.pair_hash},"
                f"{int(r.converged)},{int(r.feasible)},{r.iterations},"
                f"{format_float(r.objective)},{format_float(r.jerk)},"
                f"{format_float(r.duration)}"
            )
        return "\n".join(lines) + "\n"

    def aggregates_csv(self) -> str:
        lines = [AGGREGATE_HEADER]
        for a in self.aggregates:
            lines.append(
                f"{a['method']},{a['length']},{a['count']},"
                f"{format_float(a['median_iterations'])},"
                f"{format_float(a['iqr_iterations'])},"
                f"{format_float(a['median_objective'])},"
                f"{format_float(a['iqr_objective'])}"
            )
        return "\n".join(lines) + "\n"

    def timings_csv(self) -> str:
        lines = [TIMING_HEADER]
        for r in self.rows:
            lines.append(f"{r.problem},{r.method},{r.init_ns},{r.solve_ns}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        """Paired cold vs warm comparison over mutually converged problems."""
        cold = {r.problem: r for r in self.rows if r.method == "cold-sqp"}
        warm = {r.problem: r for r in self.rows if r.method == "warm-sqp"}
        shared = [
            p for p in sorted(cold)
            if p in warm and cold[p].converged and warm[p].converged
        ]
        if not shared:
            return {"pairs": 0}
        for p in shared:
            if cold[p].pair_hash != warm[p].pair_hash:
                raise AssertionError(f"problem {p}: cold/warm rows not paired")
        cold_iters = np.array([cold[p].iterations for p in shared])
        warm_iters = np.array([warm[p].iterations for p in shared])
        cold_obj = np.array([cold[p].objective for p in shared])
        warm_obj = np.array([warm[p].objective for p in shared])
        wins = int(np.sum(warm_iters < cold_iters))
        worst_gap = float(np.max((warm_obj - cold_obj) / np.abs(cold_obj)))
        return {
            "pairs": len(shared),
            "median_cold_iterations": float(np.median(cold_iters)),
            "median_warm_iterations": float(np.median(warm_iters)),
            "warm_win_rate": wins / len(shared),
            "median_iteration_reduction": float(
                np.median(cold_iters - warm_iters)
            ),
            "worst_objective_gap": worst_gap,
        }


def problem_hash(problem: BenchProblem, settings: SqpSettings) -> str:
    h = hashlib.sha256()
    h.update(problem.path.waypoints.tobytes())
    h.update(problem.limits.stacked().tobytes())
    h.update(format_float(problem.lam).encode())
    h.update(
        f"{problem.collocation_density},{format_float(problem.margin)}".encode()
    )
    h.update(repr(settings).encode())
    return h.hexdigest()[:16]


def _run_method(index, problem, method, params, config, settings):
    request = PlanRequest(
        problem.path, problem.limits, problem.lam,
        collocation_density=problem.collocation_density, margin=problem.margin,
    )
    phash = problem_hash(problem, settings)
    t0 = time.perf_counter_ns()
    if method == "cold-sqp":
        init = cold_start(problem.path, problem.limits)
    else:
        init = warm_start_from_model(
            params, config, problem.path, problem.limits
        )
    init_ns = time.perf_counter_ns() - t0

    length = problem.path.waypoint_count
    if method == "model-only":
        traj = decode(init)
        report = dense_feasibility_check(
            traj, problem.path, problem.limits, request.collocation_density
        )
        return BenchRow(
            problem=index, length=length, method=method, pair_hash=phash,
            converged=True, feasible=report.passed, iterations=0,
            objective=scalar_objective(traj, problem.lam),
            jerk=total_jerk(traj), duration=traj.duration,
            init_ns=init_ns, solve_ns=0,
        )

    t1 = time.perf_counter_ns()
    try:
        result = plan(request, init, settings)
    except PlanningFailedError:
        return BenchRow(
            problem=index, length=length, method=method, pair_hash=phash,
            converged=False, feasible=False, iterations=settings.max_iterations,
            objective=float("nan"), jerk=float("nan"), duration=float("nan"),
            init_ns=init_ns, solve_ns=time.perf_counter_ns() - t1,
        )
    solve_ns = time.perf_counter_ns() - t1
    return BenchRow(
        problem=index, length=length, method=method, pair_hash=phash,
        converged=result.converged, feasible=result.feasibility.passed,
        iterations=sum(a.solver.iterations for a in result.attempts),
        objective=result.objective, jerk=result.jerk,
        duration=result.duration, init_ns=init_ns, solve_ns=solve_ns,
    )


def _run_problem(args):
    index, problem, params, config, settings, methods = args
    return [
        _run_method(index, problem, m, params, config, settings)
        for m in methods
    ]


def bench_compare(
    problems,
    params=None,
    config=None,
    settings: SqpSettings | None = None,
    jobs: int = 1,
    methods=("cold-sqp", "warm-sqp"),
) -> BenchReport:
    """Run every method on every problem; never drops a failed run."""
    settings = settings or SqpSettings()
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    if any(m != "cold-sqp" for m in methods) and params is None:
        raise ValueError("warm methods need a trained model")
    tasks = [
        (i, p, params, config, settings, tuple(methods))
        for i, p in enumerate(problems)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            grouped = list(pool.map(_run_problem, tasks, chunksize=1))
    else:
        grouped = [_run_problem(t) for t in tasks]
    rows = tuple(row for group in grouped for row in group)
    return BenchReport(rows=rows, aggregates=tuple(_aggregate(rows)))


def _aggregate(rows):
    keys = sorted({(r.method, r.length) for r in rows})
    out = []
    for method, length in keys:
        sel = [
            r for r in rows
            if r.method == method and r.length == length and r.converged
        ]
        if not sel:
            continue
        iters = np.array([r.iterations for r in sel], dtype=np.float64)
        objs = np.array([r.objective for r in sel])
        out.append({
            "method": method,
            "length": length,
            "count": len(sel),
            "median_iterations": float(np.median(iters)),
            "iqr_iterations": float(
                np.percentile(iters, 75) - np.percentile(iters, 25)
            ),
            "median_objective": float(np.median(objs)),
            "iqr_objective": float(
                np.percentile(objs, 75) - np.percentile(objs, 25)
            ),
        })
    return out

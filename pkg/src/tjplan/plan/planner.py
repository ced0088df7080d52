"""The planning pipeline: solve, densely verify, retry tightened once."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from tjplan.exceptions import PlanningFailedError
from tjplan.plan.decision import DecisionVector, decode
from tjplan.plan.nlp import TrajectoryNlp
from tjplan.spline.functionals import (
    boundary_residuals,
    interpolation_residuals,
    kinematic_residuals,
)
from tjplan.spline.types import MIN_SPAN, RobotLimits, SplineTrajectory, WaypointPath
from tjplan.sqp import SqpResult, SqpSettings, solve

# dense post-check thresholds: kinematic slack may be this negative,
# boundary and interpolation residuals at most this large
KINEMATIC_SLACK_FLOOR = -1e-9
EQUALITY_TOLERANCE = 1e-6

# post-check sampling density relative to the collocation grid
POST_CHECK_FACTOR = 10


@dataclass(frozen=True)
class PlanRequest:
    path: WaypointPath
    limits: RobotLimits
    lam: float = 0.5
    collocation_density: int = 5
    margin: float = 0.99

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"balancing parameter must be in [0, 1], got {self.lam}")
        if not 0.0 < self.margin <= 1.0:
            raise ValueError(f"safety margin must be in (0, 1], got {self.margin}")
        if self.collocation_density < 3:
            raise ValueError("collocation density must be at least 3")
        if self.path.joint_count != self.limits.joint_count:
            raise ValueError("path and limits disagree on the joint count")


@dataclass(frozen=True)
class FeasibilityReport:
    """Dense verification of a candidate trajectory against raw limits."""

    min_kinematic_slack: float
    max_boundary_residual: float
    max_interpolation_residual: float
    grid_size: int

    @property
    def passed(self) -> bool:
        return (
            self.min_kinematic_slack > KINEMATIC_SLACK_FLOOR
            and self.max_boundary_residual < EQUALITY_TOLERANCE
            and self.max_interpolation_residual < EQUALITY_TOLERANCE
        )


@dataclass(frozen=True)
class Attempt:
    margin: float
    collocation_density: int
    solver: SqpResult
    feasibility: FeasibilityReport
    decision: DecisionVector


@dataclass(frozen=True)
class PlanResult:
    trajectory: SplineTrajectory
    objective: float
    jerk: float
    duration: float
    solver: SqpResult
    feasibility: FeasibilityReport
    attempts: tuple[Attempt, ...]
    timings_ns: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.solver.converged and self.feasibility.passed


def dense_feasibility_check(
    traj: SplineTrajectory,
    path: WaypointPath,
    limits: RobotLimits,
    collocation_density: int,
) -> FeasibilityReport:
    """Sample every span at POST_CHECK_FACTOR times the collocation density."""
    dv = _encode_breaks(traj)
    per_span = POST_CHECK_FACTOR * collocation_density
    segments = [
        np.linspace(dv[s], dv[s + 1], per_span, endpoint=False)
        for s in range(len(dv) - 1)
    ]
    grid = np.concatenate(segments + [dv[-1:]])
    kin = kinematic_residuals(traj, limits, grid)
    bnd = boundary_residuals(traj)
    interp = interpolation_residuals(traj, path, dv)
    return FeasibilityReport(
        min_kinematic_slack=float(kin.min()),
        max_boundary_residual=float(np.abs(bnd).max()),
        max_interpolation_residual=float(np.abs(interp).max()),
        grid_size=len(grid),
    )


def _encode_breaks(traj: SplineTrajectory) -> np.ndarray:
    """Waypoint times of a waypoint-pinned trajectory: its middle knots."""
    knots = traj.knots.knots
    I = traj.knots.control_point_count - 4
    return knots[5 : 5 + I]


def _attempt(request: PlanRequest, x0, margin, density, settings) -> Attempt:
    nlp = TrajectoryNlp(
        request.path, request.limits, request.lam, margin=margin,
        collocation_density=density,
    )
    result = solve(nlp.as_problem(), x0, settings)
    # durations may sit a hair under the floor after a breakdown return
    durations = np.maximum(result.x[: nlp.spans], MIN_SPAN)
    dv = DecisionVector(
        durations,
        result.x[nlp.spans :].reshape(request.path.joint_count, -1),
    )
    traj = decode(dv)
    report = dense_feasibility_check(traj, request.path, request.limits, density)
    return Attempt(margin, density, result, report, dv)


def plan(
    request: PlanRequest,
    init: DecisionVector,
    settings: SqpSettings | None = None,
) -> PlanResult:
    """Solve the trajectory NLP from init and verify the result densely.

    If the dense post-check fails, one tightened retry runs with the
    safety margin squared and the collocation density doubled, starting
    from the first attempt's iterate.  A result whose post-check still
    fails raises PlanningFailedError.
    """
    if init.waypoint_count != request.path.waypoint_count:
        raise ValueError(
            f"init has {init.waypoint_count} waypoints, path has "
            f"{request.path.waypoint_count}"
        )
    if init.joint_count != request.path.joint_count:
        raise ValueError("init and path disagree on the joint count")
    settings = settings or SqpSettings()

    t0 = time.perf_counter_ns()
    first = _attempt(
        request, init.flatten(), request.margin, request.collocation_density, settings
    )
    attempts = [first]
    chosen = first
    if not (first.solver.converged and first.feasibility.passed):
        second = _attempt(
            request,
            first.solver.x,
            request.margin**2,
            2 * request.collocation_density,
            settings,
        )
        attempts.append(second)
        chosen = second if _better(second, first) else first
    solve_ns = time.perf_counter_ns() - t0

    if not chosen.feasibility.passed:
        if chosen.solver.converged:
            raise PlanningFailedError(
                "solver converged but the dense feasibility check failed twice",
                diagnostics=_diagnostics(attempts),
            )
        raise PlanningFailedError(
            "no attempt produced a densely feasible trajectory",
            diagnostics=_diagnostics(attempts),
        )

    dv = chosen.decision
    traj = decode(dv)
    nlp = TrajectoryNlp(
        request.path, request.limits, request.lam, margin=chosen.margin,
        collocation_density=chosen.collocation_density,
    )
    J, T = nlp.objective_parts(dv.flatten())
    return PlanResult(
        trajectory=traj,
        objective=request.lam * J + (1.0 - request.lam) * T,
        jerk=J,
        duration=T,
        solver=chosen.solver,
        feasibility=chosen.feasibility,
        attempts=tuple(attempts),
        timings_ns={"solve": solve_ns},
    )


def _better(second: Attempt, first: Attempt) -> bool:
    if second.feasibility.passed != first.feasibility.passed:
        return second.feasibility.passed
    if second.solver.converged != first.solver.converged:
        return second.solver.converged
    return second.feasibility.min_kinematic_slack >= first.feasibility.min_kinematic_slack


def _diagnostics(attempts) -> dict:
    return {
        "attempts": [
            {
                "margin": a.margin,
                "collocation_density": a.collocation_density,
                "status": a.solver.status.value,
                "iterations": a.solver.iterations,
                "constraint_violation": a.solver.constraint_violation,
                "min_kinematic_slack": a.feasibility.min_kinematic_slack,
                "max_boundary_residual": a.feasibility.max_boundary_residual,
                "max_interpolation_residual": a.feasibility.max_interpolation_residual,
            }
            for a in attempts
        ]
    }

"""Heuristic initialization: velocity-budget durations + interpolation solve."""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import InfeasiblePathError, PlanningFailedError
from tjplan.plan.decision import DecisionVector, knot_vector_from_durations, waypoint_times
from tjplan.spline import kernels
from tjplan.spline.types import DEGREE, MIN_SPAN, RobotLimits, WaypointPath


def _heuristic_durations(path: WaypointPath, limits: RobotLimits) -> np.ndarray:
    """Each span long enough to cross it at half the velocity limit."""
    deltas = np.abs(np.diff(path.waypoints, axis=0))  # (I-1, K)
    d = np.max(deltas / (0.5 * limits.qd_max[None, :]), axis=1)
    return np.maximum(d, MIN_SPAN)


def _interpolation_matrix(durations: np.ndarray, I: int) -> np.ndarray:
    """Square system: I interpolation rows + 4 boundary-derivative rows."""
    M = I + 4
    kv = knot_vector_from_durations(durations)
    t_wp = waypoint_times(durations)
    spans, ders = kernels.basis_grid(kv.knots, DEGREE, t_wp, 2)
    A = np.zeros((M, M))
    window = np.arange(-DEGREE, 1)
    for i in range(I):
        A[i, spans[i] + window] = ders[i, 0, :]
    for b, (i_pt, order) in enumerate([(0, 1), (I - 1, 1), (0, 2), (I - 1, 2)]):
        A[I + b, spans[i_pt] + window] = ders[i_pt, order, :]
    return A


def cold_start(path: WaypointPath, limits: RobotLimits) -> DecisionVector:
    """Deterministic initial decision vector for a feasible waypoint path.

    Durations come from a half-speed velocity budget per span; control
    points solve the square interpolation + rest-to-rest boundary system
    at those knots.
    """
    if not path.within_limits(limits):
        raise InfeasiblePathError("a waypoint exceeds the position limits")
    return interpolating_decision(path, _heuristic_durations(path, limits))


def interpolating_decision(
    path: WaypointPath, durations: np.ndarray
) -> DecisionVector:
    """The unique decision vector with the given spans that interpolates
    the waypoints and satisfies the rest-to-rest boundary conditions.

    The interpolation + boundary system is square (I + 4 equations and
    unknowns per joint); a singular system is retried once with the
    durations stretched by 1%.
    """
    I = path.waypoint_count
    rhs = np.zeros((I + 4, path.joint_count))
    rhs[:I] = path.waypoints

    for attempt in range(2):
        A = _interpolation_matrix(durations, I)
        try:
            ctrl = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            ctrl = None
        if ctrl is not None and np.all(np.isfinite(ctrl)):
            return DecisionVector(durations, ctrl.T)
        durations = durations * 1.01
    raise PlanningFailedError(
        "interpolation system is singular even after perturbing durations",
        diagnostics={"durations": durations.tolist()},
    )

"""Objective and constraint functionals over spline trajectories."""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import DegenerateTrajectoryError
from tjplan.spline.evaluate import eval_grid
from tjplan.spline.types import RobotLimits, SplineTrajectory, WaypointPath

# 3-point Gauss-Legendre on [-1, 1].  The jerk of a quintic is piecewise
# quadratic, so the squared integrand has degree 4 and 3 points are exact.
GAUSS_X = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
GAUSS_W = np.array([5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])


def span_breaks(traj: SplineTrajectory) -> np.ndarray:
    """Distinct knot values, i.e. boundaries of the non-empty spans."""
    knots = traj.knots.knots
    breaks = [knots[0]]
    for u in knots:
        if u > breaks[-1]:
            breaks.append(u)
    return np.array(breaks)


def gauss_points(breaks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """3 Gauss nodes per span and their dt-measure weights."""
    a = breaks[:-1]
    h = np.diff(breaks)
    nodes = (a[:, None] + h[:, None] * (GAUSS_X[None, :] + 1.0) / 2.0).ravel()
    weights = (h[:, None] / 2.0 * GAUSS_W[None, :]).ravel()
    return nodes, weights


def joint_jerk_integrals(traj: SplineTrajectory) -> np.ndarray:
    """Per-joint integral of squared jerk over [0, T], exact quadrature."""
    breaks = span_breaks(traj)
    nodes, weights = gauss_points(breaks)
    jerk = eval_grid(traj, nodes, max_order=3)[:, :, 3]  # (K, n_nodes)
    return (jerk**2) @ weights


def total_jerk(traj: SplineTrajectory) -> float:
    """Sum over joints of sqrt(integral of squared jerk / T)."""
    T = traj.duration
    if T <= 0.0:
        raise DegenerateTrajectoryError("trajectory has zero duration")
    return float(np.sum(np.sqrt(joint_jerk_integrals(traj) / T)))


def scalar_objective(traj: SplineTrajectory, lam: float) -> float:
    """Weighted objective lam*J + (1-lam)*T."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"balancing parameter must be in [0, 1], got {lam}")
    return lam * total_jerk(traj) + (1.0 - lam) * traj.duration


def kinematic_residuals(traj: SplineTrajectory, limits: RobotLimits, grid) -> np.ndarray:
    """Slack of every kinematic bound at every grid point.

    One residual per (joint, grid point, order 0..3) in joint-major order;
    residual = limit - |value|, positive means satisfied.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("kinematic residual grid must be non-empty")
    vals = eval_grid(traj, grid, max_order=3)  # (K, nt, 4)
    stacked = limits.stacked()  # (K, 4)
    res = stacked[:, None, :] - np.abs(vals)
    return res.ravel()


def boundary_residuals(traj: SplineTrajectory) -> np.ndarray:
    """(qd(0), qd(T), qdd(0), qdd(T)) per joint; all-zero iff rest-to-rest."""
    vals = eval_grid(traj, [0.0, traj.duration], max_order=2)  # (K, 2, 3)
    return np.stack(
        [vals[:, 0, 1], vals[:, 1, 1], vals[:, 0, 2], vals[:, 1, 2]], axis=1
    ).ravel()


def interpolation_residuals(
    traj: SplineTrajectory, path: WaypointPath, waypoint_times
) -> np.ndarray:
    """(I, K) matrix of eval(t_i) - q_i per joint."""
    times = np.asarray(waypoint_times, dtype=np.float64)
    if len(times) != path.waypoint_count:
        raise ValueError(
            f"{len(times)} waypoint times for {path.waypoint_count} waypoints"
        )
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("waypoint times must be strictly increasing")
    if times[0] != 0.0 or times[-1] != traj.duration:
        raise ValueError("waypoint times must start at 0 and end at T")
    vals = eval_grid(traj, times, max_order=0)[:, :, 0]  # (K, I)
    return vals.T - path.waypoints

"""Flat NLP variable layout and its mapping to spline trajectories.

A trajectory over I waypoints and K joints becomes (I-1) knot-span
durations followed by K*(I+4) control points in joint-major order.
Waypoint i is pinned to knot 5+i, so the I waypoints occupy the clamped
start, the I-2 interior knots, and the clamped end.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tjplan.spline.types import (
    DEGREE,
    MIN_SPAN,
    JointSpline,
    KnotVector,
    SplineTrajectory,
)


@dataclass(frozen=True)
class DecisionVector:
    span_durations: np.ndarray  # (I-1,)
    control_points: np.ndarray  # (K, I+4)

    def __post_init__(self):
        d = np.ascontiguousarray(self.span_durations, dtype=np.float64)
        cp = np.ascontiguousarray(self.control_points, dtype=np.float64)
        object.__setattr__(self, "span_durations", d)
        object.__setattr__(self, "control_points", cp)
        if d.ndim != 1 or len(d) < 1:
            raise ValueError("need at least one span duration")
        if np.any(d < MIN_SPAN):
            raise ValueError(f"span durations must be >= {MIN_SPAN}")
        if cp.ndim != 2 or cp.shape[1] != len(d) + 5:
            raise ValueError(
                f"control points shape {cp.shape} inconsistent with {len(d)} spans"
            )

    @property
    def waypoint_count(self) -> int:
        return len(self.span_durations) + 1

    @property
    def joint_count(self) -> int:
        return self.control_points.shape[0]

    @property
    def total_duration(self) -> float:
        return float(np.sum(self.span_durations))

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.span_durations, self.control_points.ravel()])

    @classmethod
    def from_flat(cls, x: np.ndarray, waypoints: int, joints: int) -> "DecisionVector":
        p = waypoints - 1
        d = x[:p]
        cp = x[p:].reshape(joints, waypoints + 4)
        return cls(d, cp)


def waypoint_times(durations: np.ndarray) -> np.ndarray:
    """Cumulative span sums: the knot values the waypoints are pinned to."""
    t = np.empty(len(durations) + 1)
    t[0] = 0.0
    acc = 0.0
    for i, d in enumerate(durations):
        acc += d
        t[i + 1] = acc
    return t


def knot_vector_from_durations(durations: np.ndarray) -> KnotVector:
    times = waypoint_times(durations)
    T = times[-1]
    knots = np.concatenate([np.zeros(DEGREE + 1), times[1:-1], np.full(DEGREE + 1, T)])
    return KnotVector(knots)


def decode(dv: DecisionVector) -> SplineTrajectory:
    """Build the trajectory: clamped knot vector from durations, waypoint-pinned."""
    kv = knot_vector_from_durations(dv.span_durations)
    joints = tuple(JointSpline(cp) for cp in dv.control_points)
    return SplineTrajectory(kv, joints)


def encode(traj: SplineTrajectory) -> DecisionVector:
    """Inverse of decode for waypoint-pinned trajectories.

    Durations are recovered against a running reconstruction of the
    cumulative sums so that decode(encode(traj)) is bitwise identical.
    """
    knots = traj.knots.knots
    I = traj.knots.control_point_count - 4
    # waypoint times: 0, the I-2 interior knots, then T
    times = np.concatenate([knots[DEGREE : DEGREE + I - 1], [knots[-1]]])
    durations = np.empty(I - 1)
    acc = 0.0
    for i in range(I - 1):
        durations[i] = times[i + 1] - acc
        acc += durations[i]
    return DecisionVector(durations, traj.control_matrix())

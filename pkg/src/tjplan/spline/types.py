"""Domain types for quintic B-spline joint trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEGREE = 5

# Minimum knot-span duration (seconds).  Repeated interior knots would
# break the C3 continuity required by the jerk bound, so spans are
# floored at this value everywhere durations are produced.
MIN_SPAN = 1e-4


@dataclass(frozen=True)
class KnotVector:
    """Clamped quintic knot vector shared by all joints of a trajectory."""

    knots: np.ndarray
    degree: int = DEGREE

    def __post_init__(self):
        knots = np.ascontiguousarray(self.knots, dtype=np.float64)
        object.__setattr__(self, "knots", knots)
        m = self.degree + 1
        if knots.ndim != 1 or len(knots) < 2 * m:
            raise ValueError(f"knot vector needs at least {2 * m} entries, got {knots.shape}")
        if np.any(np.diff(knots) < 0):
            raise ValueError("knots must be non-decreasing")
        if np.any(knots[:m] != 0.0):
            raise ValueError(f"first {m} knots must be 0 (clamped start)")
        if np.any(knots[-m:] != knots[-1]):
            raise ValueError(f"last {m} knots must all equal T (clamped end)")
        if knots[-1] <= 0.0:
            raise ValueError("total duration T must be positive")

    @property
    def duration(self) -> float:
        return float(self.knots[-1])

    @property
    def control_point_count(self) -> int:
        return len(self.knots) - self.degree - 1


@dataclass(frozen=True)
class JointSpline:
    """Control points of one joint's quintic spline (radians)."""

    control_points: np.ndarray

    def __post_init__(self):
        cp = np.ascontiguousarray(self.control_points, dtype=np.float64)
        object.__setattr__(self, "control_points", cp)
        if cp.ndim != 1 or len(cp) < DEGREE + 1:
            raise ValueError(f"need at least {DEGREE + 1} control points, got {cp.shape}")


@dataclass(frozen=True)
class SplineTrajectory:
    """K per-joint quintic splines over one shared clamped knot vector."""

    knots: KnotVector
    joints: tuple[JointSpline, ...]

    def __post_init__(self):
        joints = tuple(self.joints)
        object.__setattr__(self, "joints", joints)
        if not joints:
            raise ValueError("trajectory needs at least one joint")
        m = self.knots.control_point_count
        for k, js in enumerate(joints):
            if len(js.control_points) != m:
                raise ValueError(
                    f"joint {k} has {len(js.control_points)} control points, knot vector implies {m}"
                )

    @property
    def joint_count(self) -> int:
        return len(self.joints)

    @property
    def duration(self) -> float:
        return self.knots.duration

    def control_matrix(self) -> np.ndarray:
        """All control points as a (K, M) array."""
        return np.stack([js.control_points for js in self.joints])


@dataclass(frozen=True)
class RobotLimits:
    """Per-joint symmetric bounds on position, velocity, acceleration, jerk."""

    q_max: np.ndarray
    qd_max: np.ndarray
    qdd_max: np.ndarray
    qddd_max: np.ndarray

    def __post_init__(self):
        arrays = {}
        for name in ("q_max", "qd_max", "qdd_max", "qddd_max"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if a.ndim != 1:
                raise ValueError(f"{name} must be a 1-d vector")
            if np.any(a <= 0.0):
                raise ValueError(f"{name} entries must be strictly positive")
            arrays[name] = a
            object.__setattr__(self, name, a)
        lengths = {len(a) for a in arrays.values()}
        if len(lengths) != 1:
            raise ValueError("all limit vectors must have the same length")

    @property
    def joint_count(self) -> int:
        return len(self.q_max)

    def stacked(self) -> np.ndarray:
        """Limits as a (K, 4) array ordered by derivative order."""
        return np.stack([self.q_max, self.qd_max, self.qdd_max, self.qddd_max], axis=1)

    def scaled(self, factor: float) -> "RobotLimits":
        return RobotLimits(
            self.q_max * factor,
            self.qd_max * factor,
            self.qdd_max * factor,
            self.qddd_max * factor,
        )


@dataclass(frozen=True)
class WaypointPath:
    """An (I, K) matrix of joint configurations the trajectory must pass through."""

    waypoints: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.waypoints, dtype=np.float64)
        object.__setattr__(self, "waypoints", w)
        if w.ndim != 2 or w.shape[0] < 2:
            raise ValueError(f"waypoints must be an (I>=2, K) matrix, got {w.shape}")

    @property
    def waypoint_count(self) -> int:
        return self.waypoints.shape[0]

    @property
    def joint_count(self) -> int:
        return self.waypoints.shape[1]

    def within_limits(self, limits: RobotLimits) -> bool:
        return bool(np.all(np.abs(self.waypoints) <= limits.q_max[None, :]))

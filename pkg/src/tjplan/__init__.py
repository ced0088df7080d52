"""Two-stage time-jerk optimal trajectory planning for robot arms.

A quintic B-spline trajectory core, a dense SQP solver, a dual-encoder
transformer that predicts warm starts, dataset generation, and a
benchmark CLI comparing warm-start against cold-start optimization.
"""

from tjplan.spline.types import (
    JointSpline,
    KnotVector,
    RobotLimits,
    SplineTrajectory,
    WaypointPath,
)

__version__ = "0.1.0"

__all__ = [
    "JointSpline",
    "KnotVector",
    "RobotLimits",
    "SplineTrajectory",
    "WaypointPath",
    "__version__",
]

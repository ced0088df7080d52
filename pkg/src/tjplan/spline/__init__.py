"""Quintic B-spline trajectory representation and functionals.

The basis-evaluation kernels exist twice: a compiled Cython extension
and a pure-numpy fallback.  The compiled one is picked at import unless
it is unavailable or ``TJPLAN_PURE_PYTHON=1`` is set.
"""

import os

from tjplan.spline import _kernels_py

if os.environ.get("TJPLAN_PURE_PYTHON") == "1":
    kernels = _kernels_py
else:
    try:
        from tjplan.spline import _kernels_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py

from tjplan.spline.types import (
    DEGREE,
    MIN_SPAN,
    JointSpline,
    KnotVector,
    RobotLimits,
    SplineTrajectory,
    WaypointPath,
)

__all__ = [
    "DEGREE",
    "MIN_SPAN",
    "JointSpline",
    "KnotVector",
    "RobotLimits",
    "SplineTrajectory",
    "WaypointPath",
    "kernels",
]

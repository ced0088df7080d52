"""JSON serialization of trajectories.

Format: {"degree": 5, "knots": [...], "joints": [[...], ...]} with
doubles printed at 17 significant digits so round-trips are exact.
"""

from __future__ import annotations

import json

import numpy as np

from tjplan.spline.types import JointSpline, KnotVector, SplineTrajectory


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def _render(obj) -> str:
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, np.floating):
        return format_float(float(obj))
    if isinstance(obj, np.ndarray):
        return _render(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    if isinstance(obj, dict):
        items = (f"{json.dumps(k)}: {_render(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if obj is None:
        return "null"
    return json.dumps(obj)


def dumps(obj) -> str:
    """json.dumps with floats at 17 significant digits."""
    return _render(obj)


def trajectory_to_dict(traj: SplineTrajectory) -> dict:
    return {
        "degree": traj.knots.degree,
        "knots": traj.knots.knots.tolist(),
        "joints": [js.control_points.tolist() for js in traj.joints],
    }


def trajectory_to_json(traj: SplineTrajectory) -> str:
    return dumps(trajectory_to_dict(traj))


def trajectory_from_dict(data: dict) -> SplineTrajectory:
    if data.get("degree") != 5:
        raise ValueError(f"only degree-5 trajectories supported, got {data.get('degree')}")
    knots = KnotVector(np.asarray(data["knots"], dtype=np.float64))
    joints = tuple(JointSpline(np.asarray(cp, dtype=np.float64)) for cp in data["joints"])
    return SplineTrajectory(knots, joints)


def trajectory_from_json(text: str) -> SplineTrajectory:
    return trajectory_from_dict(json.loads(text))

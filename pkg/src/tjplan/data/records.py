"""Dataset record and manifest types with JSON (de)serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from tjplan.exceptions import DatasetError
from tjplan.spline.types import (
    JointSpline,
    KnotVector,
    RobotLimits,
    SplineTrajectory,
    WaypointPath,
)

FORMAT_VERSION = 1

SPLITS = ("train", "validation", "test")

# exact 70/20/10 allocation: train and validation take their floors,
# the test split absorbs the remainder
SPLIT_FRACTIONS = {"train": 0.7, "validation": 0.2}


@dataclass(frozen=True)
class TrajectoryRecord:
    """One solved trajectory: the problem, its optimum, and solve stats."""

    index: int
    waypoints: np.ndarray  # (I, K)
    lam: float
    knots: np.ndarray  # (I + 10,)
    control_points: np.ndarray  # (K, I + 4)
    objective: float
    jerk: float
    duration: float
    iterations: int
    split: str

    def __post_init__(self):
        object.__setattr__(
            self, "waypoints", np.ascontiguousarray(self.waypoints, dtype=np.float64)
        )
        object.__setattr__(
            self, "knots", np.ascontiguousarray(self.knots, dtype=np.float64)
        )
        object.__setattr__(
            self,
            "control_points",
            np.ascontiguousarray(self.control_points, dtype=np.float64),
        )
        I, K = self.waypoints.shape
        if self.knots.shape != (I + 10,):
            raise ValueError(
                f"knot vector has shape {self.knots.shape}, expected ({I + 10},)"
            )
        if self.control_points.shape != (K, I + 4):
            raise ValueError(
                f"control points have shape {self.control_points.shape}, "
                f"expected ({K}, {I + 4})"
            )
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")

    @property
    def waypoint_count(self) -> int:
        return self.waypoints.shape[0]

    @property
    def joint_count(self) -> int:
        return self.waypoints.shape[1]

    def path(self) -> WaypointPath:
        return WaypointPath(self.waypoints)

    def trajectory(self) -> SplineTrajectory:
        return SplineTrajectory(
            KnotVector(self.knots),
            tuple(JointSpline(cp) for cp in self.control_points),
        )

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "joints": self.joint_count,
            "waypoint_count": self.waypoint_count,
            "waypoints": self.waypoints.tolist(),
            "lambda": self.lam,
            "knots": self.knots.tolist(),
            "control_points": self.control_points.tolist(),
            "objective": self.objective,
            "jerk": self.jerk,
            "duration": self.duration,
            "iterations": self.iterations,
            "split": self.split,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrajectoryRecord":
        return cls(
            index=int(data["index"]),
            waypoints=np.asarray(data["waypoints"], dtype=np.float64),
            lam=float(data["lambda"]),
            knots=np.asarray(data["knots"], dtype=np.float64),
            control_points=np.asarray(data["control_points"], dtype=np.float64),
            objective=float(data["objective"]),
            jerk=float(data["jerk"]),
            duration=float(data["duration"]),
            iterations=int(data["iterations"]),
            split=str(data["split"]),
        )


@dataclass(frozen=True)
class DatasetManifest:
    """Sidecar metadata describing one generated dataset."""

    format_version: int
    seed: int
    lam: float
    collocation_density: int
    margin: float
    attempted: int
    total: int
    split_counts: dict
    length_histogram: dict
    limits: dict
    discarded: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if sum(self.split_counts.values()) != self.total:
            raise DatasetError("manifest split counts do not sum to the total")

    def robot_limits(self) -> RobotLimits:
        return RobotLimits(
            np.asarray(self.limits["q_max"]),
            np.asarray(self.limits["qd_max"]),
            np.asarray(self.limits["qdd_max"]),
            np.asarray(self.limits["qddd_max"]),
        )

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "seed": self.seed,
            "lambda": self.lam,
            "collocation_density": self.collocation_density,
            "margin": self.margin,
            "attempted": self.attempted,
            "total": self.total,
            "split_counts": dict(self.split_counts),
            "length_histogram": dict(self.length_histogram),
            "limits": {k: list(v) for k, v in self.limits.items()},
            "discarded": [dict(d) for d in self.discarded],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DatasetManifest":
        if data.get("format_version") != FORMAT_VERSION:
            raise DatasetError(
                f"unsupported dataset format version {data.get('format_version')}"
            )
        return cls(
            format_version=int(data["format_version"]),
            seed=int(data["seed"]),
            lam=float(data["lambda"]),
            collocation_density=int(data["collocation_density"]),
            margin=float(data["margin"]),
            attempted=int(data["attempted"]),
            total=int(data["total"]),
            split_counts={k: int(v) for k, v in data["split_counts"].items()},
            length_histogram={k: int(v) for k, v in data["length_histogram"].items()},
            limits={k: [float(x) for x in v] for k, v in data["limits"].items()},
            discarded=tuple(data.get("discarded", [])),
        )

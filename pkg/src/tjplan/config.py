"""Planner configuration files.

INI key-value format, three sections:

    [robot]
    joints = 3
    q_max = 3.0            ; scalar broadcast to all joints,
    qd_max = 2.0 2.0 2.0   ; or one value per joint
    qdd_max = 5.0
    qddd_max = 20.0

    [planner]
    lambda = 0.5
    collocation_density = 5
    margin = 0.99

    [solver]
    max_iterations = 200
    kkt_tolerance = 1e-6

All keys are optional; omitted ones take the defaults above.  The
environment variable TJPLAN_CONFIG names the default config path.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from tjplan.spline.types import RobotLimits
from tjplan.sqp import SqpSettings

CONFIG_ENV_VAR = "TJPLAN_CONFIG"

DEFAULT_JOINTS = 3
DEFAULT_LIMIT_VALUES = {
    "q_max": 3.0,
    "qd_max": 2.0,
    "qdd_max": 5.0,
    "qddd_max": 20.0,
}


@dataclass(frozen=True)
class PlannerConfig:
    limits: RobotLimits
    lam: float = 0.5
    collocation_density: int = 5
    margin: float = 0.99
    solver: SqpSettings = SqpSettings()


def default_limits(joints: int = DEFAULT_JOINTS) -> RobotLimits:
    return RobotLimits(**{
        name: np.full(joints, value)
        for name, value in DEFAULT_LIMIT_VALUES.items()
    })


def _vector(text: str, joints: int, key: str) -> np.ndarray:
    values = [float(v) for v in text.split()]
    if len(values) == 1:
        return np.full(joints, values[0])
    if len(values) != joints:
        raise ValueError(
            f"{key} has {len(values)} entries, robot has {joints} joints"
        )
    return np.array(values)


def load_config(path: str | Path | None = None) -> PlannerConfig:
    """Load a config file; path defaults to $TJPLAN_CONFIG, else built-ins."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return PlannerConfig(limits=default_limits())

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.read(path)

    robot = parser["robot"] if parser.has_section("robot") else {}
    joints = int(robot.get("joints", DEFAULT_JOINTS))
    limit_vectors = {
        key: _vector(robot.get(key, str(default)), joints, key)
        for key, default in DEFAULT_LIMIT_VALUES.items()
    }
    limits = RobotLimits(**limit_vectors)

    planner = parser["planner"] if parser.has_section("planner") else {}
    solver_section = parser["solver"] if parser.has_section("solver") else {}
    solver = SqpSettings(
        max_iterations=int(solver_section.get("max_iterations", 200)),
        kkt_tolerance=float(solver_section.get("kkt_tolerance", 1e-6)),
    )
    return PlannerConfig(
        limits=limits,
        lam=float(planner.get("lambda", 0.5)),
        collocation_density=int(planner.get("collocation_density", 5)),
        margin=float(planner.get("margin", 0.99)),
        solver=solver,
    )

"""Shared fixtures and trajectory generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from tjplan.spline.types import JointSpline, KnotVector, SplineTrajectory


def random_knot_vector(rng, n_spans=None, total=None) -> KnotVector:
    n_spans = n_spans if n_spans is not None else int(rng.integers(1, 6))
    spans = rng.uniform(0.2, 2.0, size=n_spans)
    if total is not None:
        spans *= total / spans.sum()
    breaks = np.concatenate([[0.0], np.cumsum(spans)])
    knots = np.concatenate([np.zeros(5), breaks, np.full(5, breaks[-1])])
    return KnotVector(knots)


def random_trajectory(rng, n_joints=None, n_spans=None) -> SplineTrajectory:
    n_joints = n_joints if n_joints is not None else int(rng.integers(1, 4))
    kv = random_knot_vector(rng, n_spans=n_spans)
    m = kv.control_point_count
    joints = tuple(JointSpline(rng.uniform(-2.0, 2.0, size=m)) for _ in range(n_joints))
    return SplineTrajectory(kv, joints)


def constant_trajectory(value=0.5, n_joints=2, duration=2.0) -> SplineTrajectory:
    knots = np.concatenate([np.zeros(6), [duration / 2], np.full(6, duration)])
    m = len(knots) - 6
    joints = tuple(JointSpline(np.full(m, value)) for _ in range(n_joints))
    return SplineTrajectory(KnotVector(knots), joints)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

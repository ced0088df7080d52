"""Spline evaluation: values, derivatives, and basis functions."""

from __future__ import annotations

import numpy as np

from tjplan.spline import kernels
from tjplan.spline.types import KnotVector, SplineTrajectory


def basis(knots: KnotVector, t: float):
    """Nonzero basis values at t with their first active index.

    Returns (first_index, values) where values has degree+1 entries that
    are non-negative and sum to 1.
    """
    _check_domain(t, knots.duration)
    span, ders = kernels.ders_basis(knots.knots, knots.degree, float(t), 0)
    return span - knots.degree, ders[0]


def eval_spline(traj: SplineTrajectory, joint: int, t: float, order: int = 0) -> float:
    """order-th time derivative of one joint's spline at t, order in 0..3."""
    if order not in (0, 1, 2, 3):
        raise ValueError(f"derivative order must be in 0..3, got {order}")
    _check_domain(t, traj.duration)
    cp = traj.joints[joint].control_points
    kv = traj.knots
    span, ders = kernels.ders_basis(kv.knots, kv.degree, float(t), order)
    window = cp[span - kv.degree : span + 1]
    return float(ders[order] @ window)


def eval_grid(traj: SplineTrajectory, times, max_order: int = 3) -> np.ndarray:
    """Evaluate all joints at all times for orders 0..max_order.

    Returns an array of shape (K, len(times), max_order+1).
    """
    times = np.asarray(times, dtype=np.float64)
    T = traj.duration
    if times.size == 0:
        raise ValueError("empty evaluation grid")
    if np.any(times < 0.0) or np.any(times > T):
        raise ValueError("evaluation times must lie in [0, T]")
    kv = traj.knots
    spans, ders = kernels.basis_grid(kv.knots, kv.degree, times, max_order)
    ctrl = traj.control_matrix()
    return _assemble_values(ctrl, spans, ders, kv.degree)


def _assemble_values(ctrl, spans, ders, degree):
    # windows[t] = ctrl[:, span-degree : span+1]
    idx = spans[:, None] + np.arange(-degree, 1)[None, :]  # (nt, degree+1)
    windows = ctrl[:, idx]  # (K, nt, degree+1)
    return np.einsum("ktj,trj->ktr", windows, ders)


def _check_domain(t: float, T: float):
    if not 0.0 <= t <= T:
        raise ValueError(f"t={t} outside trajectory domain [0, {T}]")

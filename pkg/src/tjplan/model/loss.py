"""Composite regression loss: smooth-L1 on coefficients, L1 on knots.

Each head emits fixed-width vectors sized for the longest supported
path; for a sample with I waypoints only the first I+4 coefficient and
I+10 knot entries are meaningful, so the loss reads just those prefixes.
"""

from __future__ import annotations

import numpy as np


def smooth_l1(x: np.ndarray) -> np.ndarray:
    """0.5*x^2 where |x| < 1, |x| - 0.5 elsewhere (element-wise)."""
    ax = np.abs(x)
    return np.where(ax < 1.0, 0.5 * x * x, ax - 0.5)


def smooth_l1_grad(x: np.ndarray) -> np.ndarray:
    return np.where(np.abs(x) < 1.0, x, np.sign(x))


def composite_loss(
    pred_coef,
    pred_knot,
    target_coef,
    target_knot,
    valid_coef_len,
    valid_knot_len,
    theta1: float = 1.0,
    theta2: float = 1.0,
):
    """Batch-mean composite loss and the head gradients.

    Arrays are (B, M_out) / (B, N_out); valid lengths are (B,) ints.
    Per sample: theta1 * mean(smooth_l1(coef diff over valid prefix)) +
    theta2 * mean(|knot diff| over valid prefix); the batch reduces by
    mean.  Returns (loss, grad_coef, grad_knot).
    """
    if theta1 < 0.0 or theta2 < 0.0:
        raise ValueError("loss weights must be non-negative")
    B = pred_coef.shape[0]
    cols_c = np.arange(pred_coef.shape[1])[None, :]
    cols_k = np.arange(pred_knot.shape[1])[None, :]
    valid_c = cols_c < np.asarray(valid_coef_len)[:, None]
    valid_k = cols_k < np.asarray(valid_knot_len)[:, None]
    nc = valid_c.sum(axis=1)
    nk = valid_k.sum(axis=1)
    if np.any(nc == 0) or np.any(nk == 0):
        raise ValueError("valid prefix lengths must be positive")

    diff_c = (pred_coef - target_coef) * valid_c
    diff_k = (pred_knot - target_knot) * valid_k
    per_coef = (smooth_l1(diff_c) * valid_c).sum(axis=1) / nc
    per_knot = (np.abs(diff_k) * valid_k).sum(axis=1) / nk
    loss = float(np.mean(theta1 * per_coef + theta2 * per_knot))

    grad_coef = theta1 * smooth_l1_grad(diff_c) * valid_c / (nc[:, None] * B)
    grad_knot = theta2 * np.sign(diff_k) * valid_k / (nk[:, None] * B)
    return loss, grad_coef, grad_knot

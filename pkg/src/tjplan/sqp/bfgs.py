"""Powell-damped BFGS approximation of the Lagrangian Hessian."""

from __future__ import annotations

import numpy as np


def damped_bfgs_update(H: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """BFGS update keeping H symmetric positive definite.

    If s'y < 0.2 s'Hs the gradient difference is blended toward Hs
    (Powell damping) so the curvature condition always holds.  A
    degenerate step returns H unchanged.
    """
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sn = float(np.linalg.norm(s))
    if sn == 0.0 or not np.all(np.isfinite(y)):
        return H
    Hs = H @ s
    sHs = float(s @ Hs)
    sy = float(s @ y)
    if sHs <= 0.0:
        return H
    if sy < 0.2 * sHs:
        theta = 0.8 * sHs / (sHs - sy)
        y = theta * y + (1.0 - theta) * Hs
        sy = float(s @ y)
    if sy <= 1e-16 * sn * float(np.linalg.norm(y)):
        return H
    H_new = H - np.outer(Hs, Hs) / sHs + np.outer(y, y) / sy
    return 0.5 * (H_new + H_new.T)

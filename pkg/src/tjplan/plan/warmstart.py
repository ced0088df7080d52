"""Model-predicted warm starts for the trajectory NLP.

One forward pass per joint: that joint's waypoints are the source
sequence, the remaining joints' waypoints the context.  Coefficient
predictions are taken per joint directly; the shared knot vector is the
average of the K per-pass knot predictions, projected back to a valid
clamped non-decreasing structure.
"""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import PlanningFailedError
from tjplan.model import forward, pack_sequences
from tjplan.plan.coldstart import _heuristic_durations, interpolating_decision
from tjplan.plan.decision import DecisionVector
from tjplan.spline.types import MIN_SPAN, RobotLimits, WaypointPath

# Optimal span durations stay within roughly [0.55x, 5.7x] of the
# velocity-budget heuristic across thousands of solved problems, so
# predictions outside this envelope are treated as divergent and pulled
# back to its edge.
DURATION_ENVELOPE = (0.5, 6.0)

# Control points of legitimate optima overshoot the position bound by a
# few times (the convex hull bounds the curve, not the polygon; with
# rest-to-rest ends the interpolation system forces wide polygons), so
# the clamp is a guard against divergent predictions, not a feasibility
# projection.
CONTROL_POINT_CLAMP_FACTOR = 10.0


def predict_decision(params, config, path: WaypointPath):
    """Raw model outputs: (K, I+4) coefficients and averaged (I+10) knots."""
    if path.joint_count != config.joints:
        raise ValueError(
            f"path has {path.joint_count} joints, model expects {config.joints}"
        )
    I = path.waypoint_count
    K = path.joint_count
    coef = np.empty((K, I + 4))
    knot_sum = np.zeros(I + 10)
    for k in range(K):
        source = path.waypoints[:, k]
        others = [j for j in range(K) if j != k]
        context = path.waypoints[:, others].T
        sv, sm, cv, cm = pack_sequences(source, context, config)
        pred_coef, pred_knot, _ = forward(
            params, config, sv[None], sm[None], cv[None], cm[None]
        )
        coef[k] = pred_coef[0, : I + 4]
        knot_sum += pred_knot[0, : I + 10]
    return coef, knot_sum / K


def assemble_warm_start(
    coef: np.ndarray, knots: np.ndarray, limits: RobotLimits
) -> DecisionVector:
    """Project raw predictions onto the decision-vector invariants.

    Knots are sorted non-decreasing; the clamped structure pins the
    first six to the start and the last six to the end, so the waypoint
    times are the middle I entries and spans are their differences,
    floored at the minimum span.  Control points are clamped to a wide
    multiple of the position limits.
    """
    coef = np.asarray(coef, dtype=np.float64)
    knots = np.asarray(knots, dtype=np.float64)
    K, m = coef.shape
    I = m - 4
    if knots.shape != (I + 10,):
        raise ValueError(
            f"knot prediction has shape {knots.shape}, expected ({I + 10},)"
        )
    ordered = np.sort(knots)
    breaks = ordered[5 : 5 + I]
    durations = np.maximum(np.diff(breaks), MIN_SPAN)
    bound = CONTROL_POINT_CLAMP_FACTOR * limits.q_max[:, None]
    clamped = np.clip(coef, -bound, bound)
    return DecisionVector(durations, clamped)


def warm_start_from_model(
    params, config, path: WaypointPath, limits: RobotLimits
) -> DecisionVector:
    """Predict a decision vector for path with a trained model.

    Only the predicted knots carry information the solver cannot recover
    instantly: given the span durations, the control points are the
    unique solution of the square interpolation + boundary system, so
    they are recomputed exactly at the predicted durations.  The (noisier)
    coefficient predictions serve as the fallback when that system is
    singular.

    Raises UnsupportedPathLengthError when the path is longer than the
    model's configured maximum.
    """
    coef, knots = predict_decision(params, config, path)
    predicted = assemble_warm_start(coef, knots, limits)
    heuristic = _heuristic_durations(path, limits)
    durations = np.clip(
        predicted.span_durations,
        DURATION_ENVELOPE[0] * heuristic,
        DURATION_ENVELOPE[1] * heuristic,
    )
    try:
        return interpolating_decision(path, durations)
    except PlanningFailedError:
        return predicted

"""Trajectory rendering: position plots as SVG, full samples as CSV."""

from __future__ import annotations

import numpy as np

from tjplan.spline.evaluate import eval_grid
from tjplan.spline.serialize import format_float
from tjplan.spline.types import SplineTrajectory

SAMPLE_COUNT = 200

SVG_WIDTH = 640
SVG_HEIGHT = 400
SVG_MARGIN = 40

# cycled per joint
SERIES_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
    "#9467bd", "#8c564b", "#e377c2",
)


def sample_trajectory(traj: SplineTrajectory, count: int = SAMPLE_COUNT):
    """(times, values) with values shaped (K, count, 4) for orders 0..3."""
    times = np.linspace(0.0, traj.duration, count)
    return times, eval_grid(traj, times, max_order=3)


def trajectory_csv(traj: SplineTrajectory, count: int = SAMPLE_COUNT) -> str:
    """One row per sample: t then q, qd, qdd, qddd per joint."""
    times, values = sample_trajectory(traj, count)
    K = traj.joint_count
    header = ["t"]
    for k in range(K):
        header += [f"q{k}", f"qd{k}", f"qdd{k}", f"qddd{k}"]
    lines = [",".join(header)]
    for i, t in enumerate(times):
        cells = [format_float(t)]
        for k in range(K):
            cells += [format_float(values[k, i, o]) for o in range(4)]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def trajectory_svg(traj: SplineTrajectory, count: int = SAMPLE_COUNT) -> str:
    """Position curves of all joints as one SVG with K polyline series."""
    times, values = sample_trajectory(traj, count)
    positions = values[:, :, 0]  # (K, count)
    lo = float(positions.min())
    hi = float(positions.max())
    if hi - lo < 1e-12:
        hi = lo + 1.0
    inner_w = SVG_WIDTH - 2 * SVG_MARGIN
    inner_h = SVG_HEIGHT - 2 * SVG_MARGIN

    def sx(t):
        return SVG_MARGIN + inner_w * t / traj.duration

    def sy(q):
        return SVG_MARGIN + inner_h * (hi - q) / (hi - lo)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" '
        f'height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
        f'<line x1="{SVG_MARGIN}" y1="{SVG_HEIGHT - SVG_MARGIN}" '
        f'x2="{SVG_WIDTH - SVG_MARGIN}" y2="{SVG_HEIGHT - SVG_MARGIN}" '
        'stroke="black"/>',
        f'<line x1="{SVG_MARGIN}" y1="{SVG_MARGIN}" x2="{SVG_MARGIN}" '
        f'y2="{SVG_HEIGHT - SVG_MARGIN}" stroke="black"/>',
    ]
    for k in range(traj.joint_count):
        pts = " ".join(
            f"{sx(t):.2f},{sy(q):.2f}" for t, q in zip(times, positions[k])
        )
        color = SERIES_COLORS[k % len(SERIES_COLORS)]
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
            f'points="{pts}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

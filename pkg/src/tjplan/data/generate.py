"""Dataset generation: sample paths, solve them cold, write JSON lines.

Each sample index gets its own seeded RNG stream, so the generated
records are byte-identical for a given (seed, config) regardless of how
many worker processes run the solves.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from tjplan.data.records import (
    FORMAT_VERSION,
    SPLIT_FRACTIONS,
    DatasetManifest,
    TrajectoryRecord,
)
from tjplan.exceptions import (
    DatasetError,
    NumericalBreakdownError,
    PlanningFailedError,
)
from tjplan.plan import PlanRequest, cold_start, encode, plan
from tjplan.spline.serialize import dumps
from tjplan.spline.types import RobotLimits, WaypointPath
from tjplan.sqp import SqpSettings

logger = logging.getLogger(__name__)

# labels are polished to this KKT residual so that re-solving the same
# problem from a stored label terminates immediately instead of spending
# iterations crossing the solver's own (looser) convergence threshold
POLISH_KKT_TOLERANCE = 1e-8

# sampling stays away from the position bound so interpolation has slack
SAMPLE_POSITION_FRACTION = 0.9

# abort generation below this converged/attempted ratio
MIN_CONVERGENCE_RATE = 0.5


def sample_path(waypoints: int, limits: RobotLimits, rng) -> WaypointPath:
    """I waypoints, i.i.d. uniform per joint within +-0.9 q_max."""
    if waypoints < 2:
        raise ValueError("need at least two waypoints")
    span = SAMPLE_POSITION_FRACTION * limits.q_max
    draws = rng.uniform(-1.0, 1.0, size=(waypoints, limits.joint_count))
    return WaypointPath(draws * span[None, :])


def split_assignment(count: int, seed: int) -> list:
    """Deterministic exact 70/20/10 split by sorting index hashes."""
    digests = [
        hashlib.sha256(f"{seed}:{i}".encode()).hexdigest() for i in range(count)
    ]
    order = sorted(range(count), key=digests.__getitem__)
    n_train = int(SPLIT_FRACTIONS["train"] * count)
    n_val = int(SPLIT_FRACTIONS["validation"] * count)
    splits = [""] * count
    for pos, idx in enumerate(order):
        if pos < n_train:
            splits[idx] = "train"
        elif pos < n_train + n_val:
            splits[idx] = "validation"
        else:
            splits[idx] = "test"
    return splits


def _solve_sample(args):
    """Solve one sample; returns (index, record fields | None, reason)."""
    index, seed, lo, hi, limits, lam, density, margin = args
    rng = np.random.default_rng([seed, index])
    length = int(rng.integers(lo, hi + 1))
    path = sample_path(length, limits, rng)
    request = PlanRequest(
        path, limits, lam, collocation_density=density, margin=margin
    )
    try:
        init = cold_start(path, limits)
        result = plan(request, init)
    except (PlanningFailedError, NumericalBreakdownError) as exc:
        return index, None, f"{type(exc).__name__}: {exc}"
    if not result.converged:
        return index, None, f"solver status {result.solver.status.value}"
    if len(result.attempts) > 1:
        # a retry optimum answers a tighter NLP than the nominal one;
        # keeping it would mix inconsistent labels into the dataset and
        # break the warm-restart fixed-point property
        return index, None, "needed the tightened retry"
    try:
        polished = plan(
            request,
            encode(result.trajectory),
            SqpSettings(kkt_tolerance=POLISH_KKT_TOLERANCE),
        )
    except (PlanningFailedError, NumericalBreakdownError) as exc:
        return index, None, f"polish failed, {type(exc).__name__}: {exc}"
    if not polished.converged or len(polished.attempts) > 1:
        return index, None, "polish did not converge in one attempt"
    traj = polished.trajectory
    iterations = sum(
        a.solver.iterations for r in (result, polished) for a in r.attempts
    )
    fields = {
        "waypoints": path.waypoints,
        "lam": lam,
        "knots": traj.knots.knots,
        "control_points": traj.control_matrix(),
        "objective": polished.objective,
        "jerk": polished.jerk,
        "duration": polished.duration,
        "iterations": iterations,
    }
    return index, fields, None


def generate_dataset(
    n: int,
    length_range: tuple,
    limits: RobotLimits,
    lam: float,
    seed: int,
    out: str | Path,
    collocation_density: int = 7,
    margin: float = 0.95,
    jobs: int = 1,
) -> DatasetManifest:
    """Generate n solved samples and write <out>.jsonl + <out>.manifest.json.

    Path lengths are drawn uniformly from the inclusive length_range.
    Samples whose solve fails are discarded and logged in the manifest;
    a convergence rate below 50% aborts with diagnostics.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    lo, hi = int(length_range[0]), int(length_range[1])
    if not 2 <= lo <= hi:
        raise ValueError(f"invalid length range [{lo}, {hi}]")

    tasks = [
        (i, seed, lo, hi, limits, lam, collocation_density, margin)
        for i in range(n)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_solve_sample, tasks, chunksize=4))
    else:
        outcomes = [_solve_sample(t) for t in tasks]

    solved = []
    discarded = []
    for index, fields, reason in outcomes:
        if fields is None:
            logger.warning("sample %d discarded: %s", index, reason)
            discarded.append({"sample": index, "reason": reason})
        else:
            solved.append(fields)

    rate = len(solved) / n
    if rate < MIN_CONVERGENCE_RATE:
        raise DatasetError(
            f"convergence rate {rate:.2f} below {MIN_CONVERGENCE_RATE}",
            diagnostics={"attempted": n, "converged": len(solved),
                         "discarded": discarded},
        )

    splits = split_assignment(len(solved), seed)
    records = [
        TrajectoryRecord(index=i, split=splits[i], **fields)
        for i, fields in enumerate(solved)
    ]

    histogram = {}
    for rec in records:
        key = str(rec.waypoint_count)
        histogram[key] = histogram.get(key, 0) + 1
    split_counts = {name: splits.count(name) for name in ("train", "validation", "test")}
    manifest = DatasetManifest(
        format_version=FORMAT_VERSION,
        seed=seed,
        lam=lam,
        collocation_density=collocation_density,
        margin=margin,
        attempted=n,
        total=len(records),
        split_counts=split_counts,
        length_histogram=dict(sorted(histogram.items(), key=lambda kv: int(kv[0]))),
        limits={
            "q_max": limits.q_max.tolist(),
            "qd_max": limits.qd_max.tolist(),
            "qdd_max": limits.qdd_max.tolist(),
            "qddd_max": limits.qddd_max.tolist(),
        },
        discarded=tuple(discarded),
    )

    out = Path(out)
    stem = out.with_suffix("") if out.suffix == ".jsonl" else out
    jsonl_path = stem.with_suffix(".jsonl")
    manifest_path = stem.with_suffix(".manifest.json")
    with open(jsonl_path, "w") as fh:
        for rec in records:
            fh.write(dumps(rec.to_dict()) + "\n")
    with open(manifest_path, "w") as fh:
        fh.write(dumps(manifest.to_dict()) + "\n")
    return manifest

"""Dataset loading with per-record validation."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from tjplan.data.records import DatasetManifest, TrajectoryRecord
from tjplan.exceptions import DatasetError
from tjplan.model import make_sample
from tjplan.plan.planner import dense_feasibility_check

# loaded ground truth may miss the generation-time tolerances by this much
FEASIBILITY_TOLERANCE = 1e-6


def _dataset_paths(path: str | Path) -> tuple:
    path = Path(path)
    stem = path.with_suffix("") if path.suffix == ".jsonl" else path
    return stem.with_suffix(".jsonl"), stem.with_suffix(".manifest.json")


def load_dataset(path: str | Path, validate: bool = True):
    """Read <path>.jsonl + manifest; returns (records, manifest).

    Validation rebuilds every record's trajectory and re-runs the dense
    feasibility check; a record whose residuals exceed 1e-6 is rejected
    with its index named in the error.
    """
    jsonl_path, manifest_path = _dataset_paths(path)
    if not jsonl_path.exists() or not manifest_path.exists():
        raise DatasetError(f"dataset files missing for {jsonl_path}")

    with open(manifest_path) as fh:
        manifest = DatasetManifest.from_dict(json.load(fh))

    records = []
    with open(jsonl_path) as fh:
        for lineno, line in enumerate(fh):
            if not line.strip():
                continue
            try:
                record = TrajectoryRecord.from_dict(json.loads(line))
            except (KeyError, ValueError, TypeError) as exc:
                raise DatasetError(f"record {lineno}: {exc}") from exc
            if record.index != lineno:
                raise DatasetError(
                    f"record {lineno}: stored index {record.index} out of order"
                )
            records.append(record)

    if len(records) != manifest.total:
        raise DatasetError(
            f"manifest counts {manifest.total} records, file has {len(records)}"
        )
    counted = {"train": 0, "validation": 0, "test": 0}
    for record in records:
        counted[record.split] += 1
    if counted != manifest.split_counts:
        raise DatasetError(
            f"split counts {counted} disagree with manifest {manifest.split_counts}"
        )

    if validate:
        limits = manifest.robot_limits()
        for record in records:
            _validate_record(record, limits, manifest.collocation_density)
    return records, manifest


def _validate_record(record: TrajectoryRecord, limits, density: int) -> None:
    index = record.index
    try:
        traj = record.trajectory()
    except ValueError as exc:
        raise DatasetError(f"record {index}: {exc}") from exc
    finite = np.isfinite([record.objective, record.jerk, record.duration, record.lam])
    if not finite.all():
        raise DatasetError(f"record {index}: non-finite stored scalar")
    report = dense_feasibility_check(traj, record.path(), limits, density)
    if report.min_kinematic_slack < -FEASIBILITY_TOLERANCE:
        raise DatasetError(
            f"record {index}: kinematic slack {report.min_kinematic_slack} "
            f"below -{FEASIBILITY_TOLERANCE}"
        )
    worst_eq = max(report.max_boundary_residual, report.max_interpolation_residual)
    if worst_eq > FEASIBILITY_TOLERANCE:
        raise DatasetError(
            f"record {index}: equality residual {worst_eq} above "
            f"{FEASIBILITY_TOLERANCE}"
        )


def record_to_samples(record: TrajectoryRecord, config) -> list:
    """One training sample per joint: that joint as source, rest as context.

    Source length I, context (K-1, I) in joint-index order; coefficient
    target is the joint's control points, knot target the shared knots.
    """
    samples = []
    K = record.joint_count
    for k in range(K):
        source = record.waypoints[:, k]
        others = [j for j in range(K) if j != k]
        context = record.waypoints[:, others].T
        samples.append(
            make_sample(source, context, record.control_points[k], record.knots, config)
        )
    return samples

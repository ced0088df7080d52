import json

import numpy as np
import pytest

from tjplan.data import (
    generate_dataset,
    load_dataset,
    record_to_samples,
    sample_path,
    split_assignment,
)
from tjplan.exceptions import DatasetError
from tjplan.model import ModelConfig
from tjplan.plan.planner import dense_feasibility_check

from test_coldstart import desk_limits


class TestSamplePath:
    def test_fixed_seed_reproducible(self):
        limits = desk_limits()
        a = sample_path(6, limits, np.random.default_rng(3))
        b = sample_path(6, limits, np.random.default_rng(3))
        np.testing.assert_array_equal(a.waypoints, b.waypoints)

    def test_within_scaled_bounds(self):
        limits = desk_limits()
        for seed in range(20):
            path = sample_path(8, limits, np.random.default_rng(seed))
            assert np.all(np.abs(path.waypoints) <= 0.9 * limits.q_max[None, :])

    def test_empirical_mean_near_zero(self):
        # law of large numbers: per-joint mean of n uniform draws on
        # [-a, a] has std a/sqrt(3n); demand |mean| < 3 sigma
        limits = desk_limits(2)
        rng = np.random.default_rng(0)
        draws = np.concatenate(
            [sample_path(10, limits, rng).waypoints for _ in range(1000)]
        )
        a = 0.9 * 3.0
        sigma = a / np.sqrt(3 * len(draws))
        assert np.all(np.abs(draws.mean(axis=0)) < 3 * sigma)

    def test_too_few_waypoints_rejected(self):
        with pytest.raises(ValueError):
            sample_path(1, desk_limits(), np.random.default_rng(0))


class TestSplitAssignment:
    def test_exact_70_20_10(self):
        splits = split_assignment(1000, seed=5)
        assert splits.count("train") == 700
        assert splits.count("validation") == 200
        assert splits.count("test") == 100

    def test_deterministic(self):
        assert split_assignment(50, 9) == split_assignment(50, 9)

    def test_seed_changes_assignment(self):
        assert split_assignment(200, 1) != split_assignment(200, 2)


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "small"
    limits = desk_limits(2)
    manifest = generate_dataset(
        10, (6, 6), limits, lam=0.5, seed=11, out=out
    )
    return out, limits, manifest


class TestGenerate:
    def test_counts_and_histogram(self, small_dataset):
        out, _, manifest = small_dataset
        assert manifest.attempted == 10
        assert manifest.total + len(manifest.discarded) == 10
        assert sum(manifest.split_counts.values()) == manifest.total
        assert manifest.length_histogram == {"6": manifest.total}

    def test_records_pass_dense_feasibility(self, small_dataset):
        out, limits, manifest = small_dataset
        records, _ = load_dataset(out)
        for record in records:
            report = dense_feasibility_check(
                record.trajectory(), record.path(), limits,
                manifest.collocation_density,
            )
            assert report.passed

    def test_same_seed_byte_identical(self, small_dataset, tmp_path):
        out, limits, _ = small_dataset
        again = tmp_path / "again"
        generate_dataset(10, (6, 6), limits, lam=0.5, seed=11, out=again)
        for suffix in (".jsonl", ".manifest.json"):
            a = out.with_suffix(suffix).read_bytes()
            b = again.with_suffix(suffix).read_bytes()
            assert a == b

    def test_low_convergence_rate_aborts(self, tmp_path, monkeypatch):
        import tjplan.data.generate as gen

        def always_fail(args):
            return args[0], None, "stubbed failure"

        monkeypatch.setattr(gen, "_solve_sample", always_fail)
        with pytest.raises(DatasetError, match="convergence rate"):
            gen.generate_dataset(4, (6, 6), desk_limits(2), 0.5, 0, tmp_path / "bad")

    def test_parallel_matches_serial(self, small_dataset, tmp_path):
        out, limits, _ = small_dataset
        par = tmp_path / "par"
        generate_dataset(10, (6, 6), limits, lam=0.5, seed=11, out=par, jobs=2)
        assert out.with_suffix(".jsonl").read_bytes() == par.with_suffix(".jsonl").read_bytes()


class TestLoad:
    def test_round_trip_fields(self, small_dataset):
        out, _, manifest = small_dataset
        records, loaded_manifest = load_dataset(out)
        assert loaded_manifest.to_dict() == manifest.to_dict()
        rec = records[0]
        assert rec.waypoint_count == 6
        assert rec.control_points.shape == (2, 10)
        assert rec.knots.shape == (16,)

    def test_corrupted_knot_order_rejected_with_index(self, small_dataset, tmp_path):
        out, _, _ = small_dataset
        lines = out.with_suffix(".jsonl").read_text().splitlines()
        data = json.loads(lines[1])
        data["knots"][7], data["knots"][8] = data["knots"][8] + 1.0, data["knots"][7]
        lines[1] = json.dumps(data)
        dst = tmp_path / "corrupt"
        dst.with_suffix(".jsonl").write_text("\n".join(lines) + "\n")
        dst.with_suffix(".manifest.json").write_bytes(
            out.with_suffix(".manifest.json").read_bytes()
        )
        with pytest.raises(DatasetError, match="record 1"):
            load_dataset(dst)

    def test_manifest_count_mismatch_rejected(self, small_dataset, tmp_path):
        out, _, _ = small_dataset
        lines = out.with_suffix(".jsonl").read_text().splitlines()
        dst = tmp_path / "short"
        dst.with_suffix(".jsonl").write_text("\n".join(lines[:-1]) + "\n")
        dst.with_suffix(".manifest.json").write_bytes(
            out.with_suffix(".manifest.json").read_bytes()
        )
        with pytest.raises(DatasetError, match="manifest"):
            load_dataset(dst)

    def test_shifted_control_points_fail_feasibility(self, small_dataset, tmp_path):
        out, _, _ = small_dataset
        lines = out.with_suffix(".jsonl").read_text().splitlines()
        data = json.loads(lines[0])
        data["control_points"][0][3] += 0.5
        lines[0] = json.dumps(data)
        dst = tmp_path / "infeasible"
        dst.with_suffix(".jsonl").write_text("\n".join(lines) + "\n")
        dst.with_suffix(".manifest.json").write_bytes(
            out.with_suffix(".manifest.json").read_bytes()
        )
        with pytest.raises(DatasetError, match="record 0"):
            load_dataset(dst)

    def test_missing_files_rejected(self, tmp_path):
        with pytest.raises(DatasetError):
            load_dataset(tmp_path / "nothing")


class TestRecordToSamples:
    def test_layout(self, small_dataset):
        out, _, _ = small_dataset
        records, _ = load_dataset(out, validate=False)
        rec = records[0]
        config = ModelConfig(joints=2, max_waypoints=8, dim=8, heads=2,
                             context_layers=1, source_layers=1, dropout=0.0)
        samples = record_to_samples(rec, config)
        assert len(samples) == 2
        for k, sample in enumerate(samples):
            I = rec.waypoint_count
            # source is joint k's waypoints, context the other joint's
            np.testing.assert_array_equal(
                sample.src_values[:I], rec.waypoints[:, k]
            )
            np.testing.assert_array_equal(
                sample.ctx_values[:I], rec.waypoints[:, 1 - k]
            )
            np.testing.assert_array_equal(
                sample.target_coef[: I + 4], rec.control_points[k]
            )
            np.testing.assert_array_equal(
                sample.target_knot[: I + 10], rec.knots
            )

import json

import numpy as np
import pytest

from tjplan.cli import main
from tjplan.config import load_config
from tjplan.model import load_model

from test_coldstart import desk_limits


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "ds"
    code = main([
        "generate", "--n", "8", "--lengths", "6:6", "--seed", "11",
        "--jobs", "1", "--out", str(out),
    ])
    assert code == 0
    return out


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.limits.joint_count == 3
        assert cfg.lam == 0.5
        assert cfg.margin == 0.99

    def test_file_and_env(self, tmp_path, monkeypatch):
        path = tmp_path / "robot.ini"
        path.write_text(
            "[robot]\njoints = 2\nq_max = 1.5 2.5\n\n"
            "[planner]\nlambda = 0.25\n\n[solver]\nmax_iterations = 99\n"
        )
        cfg = load_config(path)
        np.testing.assert_array_equal(cfg.limits.q_max, [1.5, 2.5])
        assert cfg.lam == 0.25
        assert cfg.solver.max_iterations == 99
        monkeypatch.setenv("TJPLAN_CONFIG", str(path))
        assert load_config(None).lam == 0.25

    def test_wrong_vector_length_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[robot]\njoints = 3\nq_max = 1.0 2.0\n")
        with pytest.raises(ValueError):
            load_config(path)

    def test_missing_file_rejected(self):
        with pytest.raises(FileNotFoundError):
            load_config("/nonexistent/config.ini")


class TestGenerateCommand:
    def test_files_written(self, dataset):
        assert dataset.with_suffix(".jsonl").exists()
        assert dataset.with_suffix(".manifest.json").exists()


class TestTrainCommand:
    def test_tiny_training_run(self, dataset, tmp_path):
        model = tmp_path / "model.bin"
        history = tmp_path / "history.csv"
        code = main([
            "train", "--dataset", str(dataset), "--out", str(model),
            "--dim", "4", "--heads", "1", "--layers", "1", "--dropout", "0.0",
            "--epochs", "2", "--batch-size", "4", "--seed", "1",
            "--history", str(history),
        ])
        assert code == 0
        params, config = load_model(model)
        assert config.joints == 3
        assert history.read_text().startswith("epoch,")


class TestPlanCommand:
    def test_cold_plan_json(self, tmp_path, capsys):
        rng = np.random.default_rng(5)
        waypoints = rng.uniform(-1.0, 1.0, size=(6, 3))
        wp_file = tmp_path / "wp.json"
        wp_file.write_text(json.dumps(waypoints.tolist()))
        code = main(["plan", "--waypoints-file", str(wp_file), "--cold"])
        out = capsys.readouterr().out
        assert code == 0
        payload = json.loads(out)
        assert payload["converged"] is True
        assert payload["method"] == "cold-sqp"
        assert payload["trajectory"]["degree"] == 5
        assert payload["feasibility"]["min_kinematic_slack"] > -1e-9

    def test_missing_waypoints_file_exit_1(self, tmp_path, capsys):
        code = main([
            "plan", "--waypoints-file", str(tmp_path / "none.json"), "--cold",
        ])
        err = capsys.readouterr().err
        assert code == 1
        payload = json.loads(err)
        assert "error" in payload and "message" in payload


class TestBenchCommand:
    def test_seeded_runs_byte_identical(self, tmp_path, capsys):
        out1 = tmp_path / "b1"
        out2 = tmp_path / "b2"
        for out in (out1, out2):
            code = main([
                "bench", "--lengths", "6", "--n", "2", "--seed", "7",
                "--methods", "cold-sqp", "--out", str(out),
            ])
            assert code == 0
        capsys.readouterr()
        a = out1.with_suffix(".csv").read_bytes()
        b = out2.with_suffix(".csv").read_bytes()
        assert a == b
        agg1 = (tmp_path / "b1_aggregates.csv").read_bytes()
        agg2 = (tmp_path / "b2_aggregates.csv").read_bytes()
        assert agg1 == agg2
        assert (tmp_path / "b1_timings.csv").exists()

    def test_warm_without_model_errors(self, tmp_path, capsys):
        code = main([
            "bench", "--lengths", "6", "--n", "1", "--seed", "1",
            "--out", str(tmp_path / "x"),
        ])
        capsys.readouterr()
        assert code == 1


class TestInspectCommand:
    def test_svg_and_csv_written(self, dataset, tmp_path, capsys):
        out = tmp_path / "traj"
        code = main([
            "inspect", "--dataset", str(dataset), "--index", "0",
            "--out", str(out),
        ])
        capsys.readouterr()
        assert code == 0
        svg = out.with_suffix(".svg").read_text()
        assert svg.count("<polyline") == 3
        csv = out.with_suffix(".csv").read_text().strip().split("\n")
        assert len(csv) == 201
        assert csv[0].startswith("t,q0,qd0,qdd0,qddd0")

    def test_bad_index_exit_1(self, dataset, tmp_path, capsys):
        code = main([
            "inspect", "--dataset", str(dataset), "--index", "999",
            "--out", str(tmp_path / "x"),
        ])
        capsys.readouterr()
        assert code == 1


class TestUsage:
    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as e:
            main(["plan", "--no-such-flag"])
        assert e.value.code == 2

    def test_missing_subcommand_exit_2(self):
        with pytest.raises(SystemExit) as e:
            main([])
        assert e.value.code == 2

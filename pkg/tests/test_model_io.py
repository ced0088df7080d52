import numpy as np
import pytest

from tjplan.exceptions import ModelFileError
from tjplan.model import ModelConfig, init_params, load_model, param_shapes, save_model

from test_model_backward import tiny_config


class TestModelFile:
    def test_round_trip_bitwise(self, tmp_path):
        config = tiny_config()
        params = init_params(config, np.random.default_rng(0))
        path = tmp_path / "model.bin"
        save_model(params, config, path)
        loaded, loaded_config = load_model(path)
        assert loaded_config == config
        assert set(loaded) == set(params)
        for name in params:
            np.testing.assert_array_equal(loaded[name], params[name])

    def test_truncated_file_rejected(self, tmp_path):
        config = tiny_config()
        params = init_params(config, np.random.default_rng(1))
        path = tmp_path / "model.bin"
        save_model(params, config, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "model.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_wrong_version_rejected(self, tmp_path):
        config = tiny_config()
        params = init_params(config, np.random.default_rng(2))
        path = tmp_path / "model.bin"
        save_model(params, config, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 99
        path.write_bytes(bytes(blob))
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_trailing_bytes_rejected(self, tmp_path):
        config = tiny_config()
        params = init_params(config, np.random.default_rng(3))
        path = tmp_path / "model.bin"
        save_model(params, config, path)
        path.write_bytes(path.read_bytes() + b"extra")
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_shape_table_covers_all_params(self):
        config = tiny_config()
        params = init_params(config, np.random.default_rng(4))
        names = [n for n, _ in param_shapes(config)]
        assert sorted(names) == sorted(params)
        assert len(names) == len(set(names))

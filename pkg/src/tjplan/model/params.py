"""Parameter initialization and the versioned binary model file."""

from __future__ import annotations

import json
import struct

import numpy as np

from tjplan.exceptions import ModelFileError
from tjplan.model.config import ModelConfig

MAGIC = b"TJPM"
FORMAT_VERSION = 1


def _attention_shapes(prefix: str, D: int) -> list[tuple[str, tuple]]:
    shapes = []
    for name in ("wq", "wk", "wv", "wo"):
        shapes.append((f"{prefix}_{name}", (D, D)))
    for name in ("bq", "bk", "bv", "bo"):
        shapes.append((f"{prefix}_{name}", (D,)))
    return shapes


def _ffn_shapes(prefix: str, D: int, F: int) -> list[tuple[str, tuple]]:
    return [
        (f"{prefix}_ffn_w1", (D, F)),
        (f"{prefix}_ffn_b1", (F,)),
        (f"{prefix}_ffn_w2", (F, D)),
        (f"{prefix}_ffn_b2", (D,)),
    ]


def _norm_shapes(prefix: str, D: int) -> list[tuple[str, tuple]]:
    return [(f"{prefix}_gain", (D,)), (f"{prefix}_bias", (D,))]


def param_shapes(config: ModelConfig) -> list[tuple[str, tuple]]:
    """Every parameter name and shape in canonical (serialization) order."""
    D, F = config.dim, config.ffn_dim
    shapes: list[tuple[str, tuple]] = [
        ("embed_w", (D,)),
        ("embed_b", (D,)),
        ("pad_token", (D,)),
    ]
    for i in range(config.context_layers):
        p = f"ctx{i}"
        shapes += _attention_shapes(f"{p}_attn", D)
        shapes += _norm_shapes(f"{p}_ln1", D)
        shapes += _ffn_shapes(p, D, F)
        shapes += _norm_shapes(f"{p}_ln2", D)
    for i in range(config.source_layers):
        p = f"src{i}"
        shapes += _attention_shapes(f"{p}_attn", D)
        shapes += _norm_shapes(f"{p}_ln1", D)
        shapes += _attention_shapes(f"{p}_cattn", D)
        shapes += _norm_shapes(f"{p}_ln2", D)
        shapes += _ffn_shapes(p, D, F)
        shapes += _norm_shapes(f"{p}_ln3", D)
    for head, width in (("coef", config.coef_out), ("knot", config.knot_out)):
        shapes += [
            (f"{head}_w1", (D, D)),
            (f"{head}_b1", (D,)),
            (f"{head}_w2", (D, width)),
            (f"{head}_b2", (width,)),
        ]
    return shapes


def init_params(config: ModelConfig, rng: np.random.Generator) -> dict:
    """Scaled-Gaussian weights, zero biases, unit layer-norm gains."""
    params: dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config):
        last = name.rsplit("_", 1)[-1]
        if name.endswith("_gain"):
            params[name] = np.ones(shape)
        elif name.endswith("_bias") or last in {"b", "bq", "bk", "bv", "bo", "b1", "b2"}:
            params[name] = np.zeros(shape)
        elif name == "pad_token":
            params[name] = rng.normal(0.0, 0.02, size=shape)
        else:
            fan_in = shape[0] if len(shape) == 2 else 1
            params[name] = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=shape)
    return params


def save_model(params: dict, config: ModelConfig, path) -> None:
    """Header {magic, version, config json}, then tensors in canonical order."""
    header = json.dumps(config.to_dict(), sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for name, shape in param_shapes(config):
            arr = np.ascontiguousarray(params[name], dtype="<f8")
            if arr.shape != shape:
                raise ModelFileError(
                    f"parameter {name} has shape {arr.shape}, expected {shape}"
                )
            fh.write(arr.tobytes())


def load_model(path) -> tuple[dict, ModelConfig]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[:4] != MAGIC:
        raise ModelFileError("not a model file (bad magic)")
    version = struct.unpack("<I", blob[4:8])[0]
    if version != FORMAT_VERSION:
        raise ModelFileError(
            f"model format version {version} unsupported (expected {FORMAT_VERSION})"
        )
    hlen = struct.unpack("<I", blob[8:12])[0]
    if len(blob) < 12 + hlen:
        raise ModelFileError("model file truncated in header")
    try:
        config = ModelConfig.from_dict(json.loads(blob[12 : 12 + hlen].decode()))
    except (ValueError, TypeError) as exc:
        raise ModelFileError(f"invalid model config header: {exc}") from exc
    offset = 12 + hlen
    params = {}
    for name, shape in param_shapes(config):
        count = int(np.prod(shape))
        nbytes = 8 * count
        if len(blob) < offset + nbytes:
            raise ModelFileError(f"model file truncated in tensor {name}")
        params[name] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
            .reshape(shape)
            .astype(np.float64)
        )
        offset += nbytes
    if offset != len(blob):
        raise ModelFileError("trailing bytes after final tensor")
    for name, arr in params.items():
        if not np.all(np.isfinite(arr)):
            raise ModelFileError(f"non-finite values in tensor {name}")
    return params, config

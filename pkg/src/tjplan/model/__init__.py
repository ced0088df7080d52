"""Warm-start predictor: dual-encoder transformer in plain numpy."""

from tjplan.model.config import ModelConfig
from tjplan.model.loss import composite_loss, smooth_l1, smooth_l1_grad
from tjplan.model.network import (
    backward,
    forward,
    pack_sequences,
    positional_encoding,
)
from tjplan.model.params import init_params, load_model, param_shapes, save_model
from tjplan.model.train import (
    TrainSample,
    TrainSettings,
    batch_loss,
    evaluate,
    history_csv,
    make_sample,
    train,
)

__all__ = [
    "ModelConfig",
    "TrainSample",
    "TrainSettings",
    "backward",
    "batch_loss",
    "composite_loss",
    "evaluate",
    "forward",
    "history_csv",
    "init_params",
    "load_model",
    "make_sample",
    "pack_sequences",
    "param_shapes",
    "positional_encoding",
    "save_model",
    "smooth_l1",
    "smooth_l1_grad",
    "train",
]

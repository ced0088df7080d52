"""Training loop: Adam with decoupled weight decay and a plateau scheduler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tjplan.exceptions import NumericalBreakdownError
from tjplan.model.config import ModelConfig
from tjplan.model.loss import composite_loss
from tjplan.model.network import backward, forward, pack_sequences

DIVERGENCE_LOSS = 1e6


@dataclass(frozen=True)
class TrainSample:
    """One supervised example, padded to the model's fixed widths."""

    src_values: np.ndarray  # (L,)
    src_mask: np.ndarray  # (L,) True at padding
    ctx_values: np.ndarray  # (L,)
    ctx_mask: np.ndarray  # (L,)
    target_coef: np.ndarray  # (M_out,), zero-padded
    target_knot: np.ndarray  # (N_out,), zero-padded
    valid_coef_len: int
    valid_knot_len: int


def make_sample(source, context, coef_target, knot_target,
                config: ModelConfig) -> TrainSample:
    """Pack one joint's waypoints + targets into a padded TrainSample."""
    src_values, src_mask, ctx_values, ctx_mask = pack_sequences(
        source, context, config
    )
    coef_target = np.asarray(coef_target, dtype=np.float64)
    knot_target = np.asarray(knot_target, dtype=np.float64)
    if len(coef_target) > config.coef_out or len(knot_target) > config.knot_out:
        raise ValueError("targets exceed the model's output widths")
    tc = np.zeros(config.coef_out)
    tc[: len(coef_target)] = coef_target
    tk = np.zeros(config.knot_out)
    tk[: len(knot_target)] = knot_target
    return TrainSample(
        src_values, src_mask, ctx_values, ctx_mask,
        tc, tk, len(coef_target), len(knot_target),
    )


def _stack(samples: list[TrainSample]):
    return (
        np.stack([s.src_values for s in samples]),
        np.stack([s.src_mask for s in samples]),
        np.stack([s.ctx_values for s in samples]),
        np.stack([s.ctx_mask for s in samples]),
        np.stack([s.target_coef for s in samples]),
        np.stack([s.target_knot for s in samples]),
        np.array([s.valid_coef_len for s in samples]),
        np.array([s.valid_knot_len for s in samples]),
    )


def batch_loss(params, config, samples, theta1, theta2, rng=None, training=False):
    """(loss, grads or None) over one batch."""
    sv, sm, cv, cm, tc, tk, lc, lk = _stack(samples)
    coef, knot, cache = forward(params, config, sv, sm, cv, cm, rng, training)
    loss, gcoef, gknot = composite_loss(coef, knot, tc, tk, lc, lk, theta1, theta2)
    if not training:
        return loss, None
    grads = backward(gcoef, gknot, cache, params, config)
    return loss, grads


@dataclass
class TrainSettings:
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 32
    epochs: int = 50
    theta1: float = 1.0
    theta2: float = 1.0
    plateau_patience: int = 3
    lr_decay_factor: float = 0.5
    min_lr: float = 1e-6


def history_csv(history: list[dict]) -> str:
    lines = ["epoch,train_loss,validation_loss,learning_rate"]
    for row in history:
        lines.append(
            f"{row['epoch']},{row['train_loss']:.17g},"
            f"{row['validation_loss']:.17g},{row['learning_rate']:.17g}"
        )
    return "\n".join(lines) + "\n"


def evaluate(params, config, samples, theta1=1.0, theta2=1.0,
             batch_size=64) -> float:
    """Sample-weighted mean loss with dropout disabled."""
    total, count = 0.0, 0
    for start in range(0, len(samples), batch_size):
        chunk = samples[start : start + batch_size]
        loss, _ = batch_loss(params, config, chunk, theta1, theta2)
        total += loss * len(chunk)
        count += len(chunk)
    return total / count


def train(
    train_samples: list[TrainSample],
    val_samples: list[TrainSample],
    config: ModelConfig,
    settings: TrainSettings,
    rng: np.random.Generator,
):
    """Returns (best-validation params, history).

    Adam with decoupled weight decay; the learning rate halves (by
    lr_decay_factor) after plateau_patience epochs without validation
    improvement.  Deterministic for a given RNG state.  A training loss
    above DIVERGENCE_LOSS aborts with the history attached.
    """
    if not train_samples or not val_samples:
        raise ValueError("training and validation sets must be non-empty")
    from tjplan.model.params import init_params

    params = init_params(config, rng)
    m = {k: np.zeros_like(v) for k, v in params.items()}
    v = {k: np.zeros_like(p) for k, p in params.items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0
    lr = settings.learning_rate

    history: list[dict] = []
    best_val = np.inf
    best_params = {k: p.copy() for k, p in params.items()}
    stale = 0

    for epoch in range(1, settings.epochs + 1):
        order = rng.permutation(len(train_samples))
        epoch_loss, seen = 0.0, 0
        for start in range(0, len(order), settings.batch_size):
            batch = [train_samples[i] for i in order[start : start + settings.batch_size]]
            loss, grads = batch_loss(
                params, config, batch, settings.theta1, settings.theta2,
                rng=rng, training=True,
            )
            epoch_loss += loss * len(batch)
            seen += len(batch)
            if loss > DIVERGENCE_LOSS:
                raise NumericalBreakdownError(
                    "training diverged", context={"history": history, "loss": loss}
                )
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for name in params:
                g = grads[name]
                m[name] = beta1 * m[name] + (1.0 - beta1) * g
                v[name] = beta2 * v[name] + (1.0 - beta2) * g * g
                update = (m[name] / corr1) / (np.sqrt(v[name] / corr2) + eps)
                params[name] -= lr * (update + settings.weight_decay * params[name])
        train_loss = epoch_loss / seen
        val_loss = evaluate(
            params, config, val_samples, settings.theta1, settings.theta2
        )
        history.append({
            "epoch": epoch,
            "train_loss": train_loss,
            "validation_loss": val_loss,
            "learning_rate": lr,
        })
        if val_loss < best_val - 1e-12:
            best_val = val_loss
            best_params = {k: p.copy() for k, p in params.items()}
            stale = 0
        else:
            stale += 1
            if stale >= settings.plateau_patience:
                lr = max(lr * settings.lr_decay_factor, settings.min_lr)
                stale = 0
    return best_params, history

"""The dual-encoder forward pass and its exact handwritten backward.

Data layout per inference pass: one joint's waypoints are the *source*
sequence, the other K-1 joints' waypoints the *context* sequence.  Both
are padded to L = (K-1) * I_max tokens; the source carries I real
tokens, the context (K-1) * I (context joints concatenated joint-major).
The context encoder self-attends over the context; the source encoder
interleaves masked self-attention, attention into the encoded context,
and a feed-forward sublayer; masked mean pooling and two independent
two-layer heads regress the spline coefficients and the knot vector.
"""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import NumericalBreakdownError, UnsupportedPathLengthError
from tjplan.model.config import ModelConfig
from tjplan.model.layers import (
    attention_backward,
    attention_forward,
    dropout_backward,
    dropout_forward,
    ffn_backward,
    ffn_forward,
    layer_norm_backward,
    layer_norm_forward,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
)


def positional_encoding(length: int, dim: int) -> np.ndarray:
    """Fixed sinusoidal table, (length, dim)."""
    pos = np.arange(length)[:, None]
    i = np.arange(dim)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    table = np.empty((length, dim))
    table[:, 0::2] = np.sin(angle[:, 0::2])
    table[:, 1::2] = np.cos(angle[:, 1::2])
    return table


def pack_sequences(source, context, config: ModelConfig):
    """Pad one sample's sequences to length L and build masks.

    source: (I,) waypoints of the joint being predicted; context:
    (K-1, I) waypoints of the remaining joints.  Returns
    (src_values, src_mask, ctx_values, ctx_mask), masks True at padding.
    """
    source = np.asarray(source, dtype=np.float64)
    context = np.asarray(context, dtype=np.float64)
    I = len(source)
    if I > config.max_waypoints:
        raise UnsupportedPathLengthError(
            f"path has {I} waypoints, model supports at most {config.max_waypoints}"
        )
    if context.shape != (config.joints - 1, I):
        raise ValueError(
            f"context shape {context.shape}, expected ({config.joints - 1}, {I})"
        )
    L = config.seq_len
    src_values = np.zeros(L)
    src_values[:I] = source
    src_mask = np.ones(L, dtype=bool)
    src_mask[:I] = False
    n_ctx = (config.joints - 1) * I
    ctx_values = np.zeros(L)
    ctx_values[:n_ctx] = context.ravel()
    ctx_mask = np.ones(L, dtype=bool)
    ctx_mask[:n_ctx] = False
    return src_values, src_mask, ctx_values, ctx_mask


def embed_forward(values, mask, params, config: ModelConfig):
    """Scalar affine embedding; learned pad vector; positional encoding
    added to real tokens only."""
    real = ~mask  # (B, L)
    tokens = values[:, :, None] * params["embed_w"] + params["embed_b"]
    tokens = np.where(real[:, :, None], tokens, params["pad_token"])
    pe = positional_encoding(config.seq_len, config.dim)
    tokens = tokens + real[:, :, None] * pe[None, :, :]
    return tokens, (values, real)


def embed_backward(gout, cache, grads):
    values, real = cache
    greal = gout * real[:, :, None]
    gpad = gout * (~real)[:, :, None]
    grads["embed_w"] += (greal * values[:, :, None]).sum(axis=(0, 1))
    grads["embed_b"] += greal.sum(axis=(0, 1))
    grads["pad_token"] += gpad.sum(axis=(0, 1))


def _encoder_layer_forward(x, mask, params, prefix, config, rng, training):
    z, c_attn = attention_forward(x, x, mask, params, f"{prefix}_attn", config.heads)
    z, keep1 = dropout_forward(z, config.dropout, rng, training)
    o, c_ln1 = layer_norm_forward(
        z + x, params[f"{prefix}_ln1_gain"], params[f"{prefix}_ln1_bias"]
    )
    f, c_ffn = ffn_forward(o, params, prefix)
    f, keep2 = dropout_forward(f, config.dropout, rng, training)
    out, c_ln2 = layer_norm_forward(
        f + o, params[f"{prefix}_ln2_gain"], params[f"{prefix}_ln2_bias"]
    )
    return out, (c_attn, keep1, c_ln1, c_ffn, keep2, c_ln2)


def _encoder_layer_backward(gout, cache, grads, prefix):
    c_attn, keep1, c_ln1, c_ffn, keep2, c_ln2 = cache
    gsum = layer_norm_backward(
        gout, c_ln2, grads, f"{prefix}_ln2_gain", f"{prefix}_ln2_bias"
    )
    gf = dropout_backward(gsum, keep2)
    go = gsum + ffn_backward(gf, c_ffn, grads, prefix)
    gsum1 = layer_norm_backward(
        go, c_ln1, grads, f"{prefix}_ln1_gain", f"{prefix}_ln1_bias"
    )
    gz = dropout_backward(gsum1, keep1)
    gq, gkv = attention_backward(gz, c_attn, grads, f"{prefix}_attn")
    return gsum1 + gq + gkv


def context_encoder_forward(tokens, mask, params, config, rng, training):
    x = tokens
    caches = []
    for i in range(config.context_layers):
        x, c = _encoder_layer_forward(x, mask, params, f"ctx{i}", config, rng, training)
        caches.append(c)
    return x, caches


def context_encoder_backward(gout, caches, grads, config):
    g = gout
    for i in reversed(range(config.context_layers)):
        g = _encoder_layer_backward(g, caches[i], grads, f"ctx{i}")
    return g


def _source_layer_forward(x, src_mask, memory, ctx_mask, params, prefix, config,
                          rng, training):
    z, c_attn = attention_forward(x, x, src_mask, params, f"{prefix}_attn", config.heads)
    z, keep1 = dropout_forward(z, config.dropout, rng, training)
    o1, c_ln1 = layer_norm_forward(
        z + x, params[f"{prefix}_ln1_gain"], params[f"{prefix}_ln1_bias"]
    )
    g, c_cattn = attention_forward(
        o1, memory, ctx_mask, params, f"{prefix}_cattn", config.heads
    )
    g, keep2 = dropout_forward(g, config.dropout, rng, training)
    o2, c_ln2 = layer_norm_forward(
        g + o1, params[f"{prefix}_ln2_gain"], params[f"{prefix}_ln2_bias"]
    )
    f, c_ffn = ffn_forward(o2, params, prefix)
    f, keep3 = dropout_forward(f, config.dropout, rng, training)
    out, c_ln3 = layer_norm_forward(
        f + o2, params[f"{prefix}_ln3_gain"], params[f"{prefix}_ln3_bias"]
    )
    return out, (c_attn, keep1, c_ln1, c_cattn, keep2, c_ln2, c_ffn, keep3, c_ln3)


def _source_layer_backward(gout, cache, grads, prefix):
    (c_attn, keep1, c_ln1, c_cattn, keep2, c_ln2, c_ffn, keep3, c_ln3) = cache
    gsum3 = layer_norm_backward(
        gout, c_ln3, grads, f"{prefix}_ln3_gain", f"{prefix}_ln3_bias"
    )
    gf = dropout_backward(gsum3, keep3)
    go2 = gsum3 + ffn_backward(gf, c_ffn, grads, prefix)
    gsum2 = layer_norm_backward(
        go2, c_ln2, grads, f"{prefix}_ln2_gain", f"{prefix}_ln2_bias"
    )
    gg = dropout_backward(gsum2, keep2)
    go1_from_cattn, gmemory = attention_backward(gg, c_cattn, grads, f"{prefix}_cattn")
    go1 = gsum2 + go1_from_cattn
    gsum1 = layer_norm_backward(
        go1, c_ln1, grads, f"{prefix}_ln1_gain", f"{prefix}_ln1_bias"
    )
    gz = dropout_backward(gsum1, keep1)
    gq, gkv = attention_backward(gz, c_attn, grads, f"{prefix}_attn")
    return gsum1 + gq + gkv, gmemory


def source_encoder_forward(tokens, src_mask, memory, ctx_mask, params, config,
                           rng, training):
    x = tokens
    caches = []
    for i in range(config.source_layers):
        x, c = _source_layer_forward(
            x, src_mask, memory, ctx_mask, params, f"src{i}", config, rng, training
        )
        caches.append(c)
    return x, caches


def source_encoder_backward(gout, caches, grads, config):
    g = gout
    gmemory_total = None
    for i in reversed(range(config.source_layers)):
        g, gmem = _source_layer_backward(g, caches[i], grads, f"src{i}")
        gmemory_total = gmem if gmemory_total is None else gmemory_total + gmem
    if gmemory_total is None:
        gmemory_total = np.zeros_like(gout)
    return g, gmemory_total


def heads_forward(encoded, src_mask, params):
    """Masked mean pooling, then two independent two-layer heads."""
    real = ~src_mask  # (B, L)
    counts = real.sum(axis=1)
    if np.any(counts == 0):
        raise ValueError("a sample has no unmasked source tokens to pool")
    pooled = (encoded * real[:, :, None]).sum(axis=1) / counts[:, None]
    outs = {}
    caches = {}
    for head in ("coef", "knot"):
        h, c1 = linear_forward(pooled, params[f"{head}_w1"], params[f"{head}_b1"])
        a, relu_mask = relu_forward(h)
        y, c2 = linear_forward(a, params[f"{head}_w2"], params[f"{head}_b2"])
        outs[head] = y
        caches[head] = (c1, relu_mask, c2)
    if not (np.all(np.isfinite(outs["coef"])) and np.all(np.isfinite(outs["knot"]))):
        raise NumericalBreakdownError("non-finite value in output heads")
    return outs["coef"], outs["knot"], (real, counts, caches)


def heads_backward(gcoef, gknot, cache, grads, encoded_shape):
    real, counts, caches = cache
    gpooled = np.zeros((len(counts), encoded_shape[-1]))
    for head, gy in (("coef", gcoef), ("knot", gknot)):
        c1, relu_mask, c2 = caches[head]
        ga = linear_backward(gy, c2, grads, f"{head}_w2", f"{head}_b2")
        gh = relu_backward(ga, relu_mask)
        gpooled += linear_backward(gh, c1, grads, f"{head}_w1", f"{head}_b1")
    gencoded = (
        gpooled[:, None, :] * real[:, :, None] / counts[:, None, None]
    )
    return gencoded


def forward(params, config: ModelConfig, src_values, src_mask, ctx_values,
            ctx_mask, rng=None, training=False):
    """Batched forward pass.

    src_values/ctx_values: (B, L) floats, masks (B, L) True at padding.
    Returns (coef (B, M_out), knot (B, N_out), cache); pass the cache to
    `backward` for exact gradients (dropout masks are recorded in it).
    """
    if training and config.dropout > 0.0 and rng is None:
        raise ValueError("training with dropout requires an RNG")
    src_tokens, c_semb = embed_forward(src_values, src_mask, params, config)
    ctx_tokens, c_cemb = embed_forward(ctx_values, ctx_mask, params, config)
    memory, c_ctx = context_encoder_forward(
        ctx_tokens, ctx_mask, params, config, rng, training
    )
    encoded, c_src = source_encoder_forward(
        src_tokens, src_mask, memory, ctx_mask, params, config, rng, training
    )
    coef, knot, c_heads = heads_forward(encoded, src_mask, params)
    cache = (c_semb, c_cemb, c_ctx, c_src, c_heads, encoded.shape)
    return coef, knot, cache


def backward(gcoef, gknot, cache, params, config: ModelConfig) -> dict:
    """Gradients of a scalar loss for every parameter, given head grads."""
    c_semb, c_cemb, c_ctx, c_src, c_heads, enc_shape = cache
    grads = {name: np.zeros_like(arr) for name, arr in params.items()}
    gencoded = heads_backward(gcoef, gknot, c_heads, grads, enc_shape)
    gsrc_tokens, gmemory = source_encoder_backward(gencoded, c_src, grads, config)
    gctx_tokens = context_encoder_backward(gmemory, c_ctx, grads, config)
    embed_backward(gsrc_tokens, c_semb, grads)
    embed_backward(gctx_tokens, c_cemb, grads)
    return grads

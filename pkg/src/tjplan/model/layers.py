"""Numpy layer primitives, each with an exact reverse-mode backward.

Forward functions return (output, cache); backward functions take the
upstream gradient plus the cache and return input gradients, writing
parameter gradients into a `grads` dict keyed like the parameter dict
(accumulating, so shared parameters across layers or a batch work).
Batch dimension comes first everywhere: activations are (B, L, D).
"""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import NumericalBreakdownError

LAYER_NORM_EPS = 1e-5


def _check_finite(x, where: str):
    if not np.all(np.isfinite(x)):
        raise NumericalBreakdownError(f"non-finite activation in {where}")


# -- affine ------------------------------------------------------------------


def linear_forward(x, w, b):
    return x @ w + b, (x, w)


def linear_backward(gout, cache, grads, key_w, key_b):
    x, w = cache
    grads[key_w] += np.tensordot(x, gout, axes=(tuple(range(x.ndim - 1)),) * 2)
    grads[key_b] += gout.sum(axis=tuple(range(gout.ndim - 1)))
    return gout @ w.T


# -- layer norm --------------------------------------------------------------


def layer_norm_forward(x, gain, bias):
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered**2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LAYER_NORM_EPS)
    normed = centered * inv
    return normed * gain + bias, (normed, inv, gain)


def layer_norm_backward(gout, cache, grads, key_gain, key_bias):
    normed, inv, gain = cache
    D = normed.shape[-1]
    grads[key_gain] += (gout * normed).sum(axis=tuple(range(gout.ndim - 1)))
    grads[key_bias] += gout.sum(axis=tuple(range(gout.ndim - 1)))
    gn = gout * gain
    # d/dx of (x - mean) * inv with inv depending on x
    term = gn - gn.mean(axis=-1, keepdims=True)
    term -= normed * (gn * normed).mean(axis=-1, keepdims=True)
    return term * inv


# -- ReLU --------------------------------------------------------------------


def relu_forward(x):
    mask = x > 0.0
    return x * mask, mask


def relu_backward(gout, mask):
    return gout * mask


# -- dropout -----------------------------------------------------------------


def dropout_forward(x, rate, rng, training):
    """Inverted dropout; the sampled mask is returned for exact replay."""
    if not training or rate == 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * keep, keep


def dropout_backward(gout, keep):
    if keep is None:
        return gout
    return gout * keep


# -- masked softmax ----------------------------------------------------------


def masked_softmax_forward(logits, key_mask):
    """Softmax over the last axis with masked keys excluded.

    key_mask is (B, Lk) boolean, True = padding.  Rows with every key
    masked produce all-zero weights (defined for totality).
    """
    masked = np.where(key_mask[:, None, None, :], -np.inf, logits)
    peak = np.max(masked, axis=-1, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    expd = np.exp(masked - peak)
    denom = expd.sum(axis=-1, keepdims=True)
    weights = np.where(denom > 0.0, expd / np.where(denom == 0.0, 1.0, denom), 0.0)
    return weights, weights


def masked_softmax_backward(gout, weights):
    inner = (gout * weights).sum(axis=-1, keepdims=True)
    return weights * (gout - inner)


# -- multi-head attention ----------------------------------------------------


def _split_heads(x, heads):
    B, L, D = x.shape
    return x.reshape(B, L, heads, D // heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    B, h, L, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(B, L, h * dh)


def attention_forward(q_in, kv_in, key_mask, params, prefix, heads):
    """Scaled dot-product multi-head attention with key padding mask.

    q_in: (B, Lq, D) queries source; kv_in: (B, Lk, D) keys/values
    source; key_mask: (B, Lk) True at padding.
    """
    q, cq = linear_forward(q_in, params[f"{prefix}_wq"], params[f"{prefix}_bq"])
    k, ck = linear_forward(kv_in, params[f"{prefix}_wk"], params[f"{prefix}_bk"])
    v, cv = linear_forward(kv_in, params[f"{prefix}_wv"], params[f"{prefix}_bv"])
    qh, kh, vh = (_split_heads(t, heads) for t in (q, k, v))
    scale = 1.0 / np.sqrt(qh.shape[-1])
    logits = (qh @ kh.transpose(0, 1, 3, 2)) * scale
    weights, sm_cache = masked_softmax_forward(logits, key_mask)
    ctxh = weights @ vh
    ctx = _merge_heads(ctxh)
    out, co = linear_forward(ctx, params[f"{prefix}_wo"], params[f"{prefix}_bo"])
    _check_finite(out, f"attention {prefix}")
    cache = (cq, ck, cv, co, qh, kh, vh, weights, sm_cache, scale, heads)
    return out, cache


def attention_backward(gout, cache, grads, prefix):
    cq, ck, cv, co, qh, kh, vh, weights, sm_cache, scale, heads = cache
    gctx = linear_backward(gout, co, grads, f"{prefix}_wo", f"{prefix}_bo")
    gctxh = _split_heads(gctx, heads)
    gweights = gctxh @ vh.transpose(0, 1, 3, 2)
    gvh = weights.transpose(0, 1, 3, 2) @ gctxh
    glogits = masked_softmax_backward(gweights, sm_cache) * scale
    gqh = glogits @ kh
    gkh = glogits.transpose(0, 1, 3, 2) @ qh
    gq = _merge_heads(gqh)
    gk = _merge_heads(gkh)
    gv = _merge_heads(gvh)
    gq_in = linear_backward(gq, cq, grads, f"{prefix}_wq", f"{prefix}_bq")
    gkv_in = linear_backward(gk, ck, grads, f"{prefix}_wk", f"{prefix}_bk")
    gkv_in += linear_backward(gv, cv, grads, f"{prefix}_wv", f"{prefix}_bv")
    return gq_in, gkv_in


# -- feed-forward ------------------------------------------------------------


def ffn_forward(x, params, prefix):
    h, c1 = linear_forward(x, params[f"{prefix}_ffn_w1"], params[f"{prefix}_ffn_b1"])
    a, relu_mask = relu_forward(h)
    out, c2 = linear_forward(a, params[f"{prefix}_ffn_w2"], params[f"{prefix}_ffn_b2"])
    return out, (c1, relu_mask, c2)


def ffn_backward(gout, cache, grads, prefix):
    c1, relu_mask, c2 = cache
    ga = linear_backward(gout, c2, grads, f"{prefix}_ffn_w2", f"{prefix}_ffn_b2")
    gh = relu_backward(ga, relu_mask)
    return linear_backward(gh, c1, grads, f"{prefix}_ffn_w1", f"{prefix}_ffn_b1")

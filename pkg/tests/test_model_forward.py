import numpy as np
import pytest

from tjplan.exceptions import UnsupportedPathLengthError
from tjplan.model import ModelConfig, forward, init_params, pack_sequences
from tjplan.model.layers import (
    attention_forward,
    layer_norm_forward,
    masked_softmax_forward,
)
from tjplan.model.network import (
    context_encoder_forward,
    embed_forward,
    heads_forward,
    positional_encoding,
)

from test_model_backward import tiny_config


def batch_inputs(rng, config, I=None):
    I = I if I is not None else config.max_waypoints
    source = rng.normal(size=I)
    context = rng.normal(size=(config.joints - 1, I))
    sv, sm, cv, cm = pack_sequences(source, context, config)
    return sv[None], sm[None], cv[None], cm[None]


class TestPacking:
    def test_padding_counts(self):
        config = ModelConfig(joints=3, max_waypoints=8, dim=8, heads=2,
                             context_layers=1, source_layers=1, dropout=0.0)
        source = np.zeros(5)
        context = np.zeros((2, 5))
        sv, sm, cv, cm = pack_sequences(source, context, config)
        L = 2 * 8
        assert len(sv) == L
        assert sm.sum() == L - 5  # (K-1)*I_max - I padding tokens
        assert cm.sum() == 2 * (8 - 5)  # (K-1)*(I_max - I)

    def test_too_long_path_rejected(self):
        config = tiny_config()
        with pytest.raises(UnsupportedPathLengthError):
            pack_sequences(np.zeros(4), np.zeros((1, 4)), config)

    def test_context_shape_checked(self):
        config = tiny_config()
        with pytest.raises(ValueError):
            pack_sequences(np.zeros(3), np.zeros((2, 3)), config)


class TestEmbedding:
    def test_zero_values_give_bias_plus_positional(self):
        config = tiny_config()
        rng = np.random.default_rng(0)
        params = init_params(config, rng)
        sv, sm, cv, cm = pack_sequences(np.zeros(3), np.zeros((1, 3)), config)
        tokens, _ = embed_forward(sv[None], sm[None], params, config)
        pe = positional_encoding(config.seq_len, config.dim)
        np.testing.assert_allclose(
            tokens[0, :3], params["embed_b"][None, :] + pe[:3], atol=1e-15
        )

    def test_padding_tokens_use_learned_vector(self):
        config = tiny_config()
        rng = np.random.default_rng(1)
        params = init_params(config, rng)
        sv, sm, _, _ = pack_sequences(np.zeros(2), np.zeros((1, 2)), config)
        tokens, _ = embed_forward(sv[None], sm[None], params, config)
        np.testing.assert_array_equal(tokens[0, 2], params["pad_token"])


class TestMaskedSoftmax:
    def test_rows_sum_to_one_over_unmasked(self):
        rng = np.random.default_rng(2)
        logits = rng.normal(size=(2, 3, 4, 5))
        mask = np.zeros((2, 5), dtype=bool)
        mask[:, 3:] = True
        w, _ = masked_softmax_forward(logits, mask)
        np.testing.assert_allclose(w.sum(axis=-1), 1.0, atol=1e-12)
        assert np.all(w[:, :, :, 3:] == 0.0)

    def test_all_masked_rows_are_zero(self):
        logits = np.ones((1, 1, 2, 3))
        mask = np.ones((1, 3), dtype=bool)
        w, _ = masked_softmax_forward(logits, mask)
        np.testing.assert_array_equal(w, np.zeros_like(w))


class TestAttention:
    def test_uniform_logits_average_values(self):
        # zero query/key projections give uniform attention; with identity
        # value and output maps each row becomes the mean over unmasked keys
        config = tiny_config()
        D = config.dim
        params = {
            "a_wq": np.zeros((D, D)), "a_wk": np.zeros((D, D)),
            "a_wv": np.eye(D), "a_wo": np.eye(D),
            "a_bq": np.zeros(D), "a_bk": np.zeros(D),
            "a_bv": np.zeros(D), "a_bo": np.zeros(D),
        }
        rng = np.random.default_rng(3)
        x = rng.normal(size=(1, 3, D))
        mask = np.array([[False, False, True]])
        out, _ = attention_forward(x, x, mask, params, "a", heads=1)
        expected = x[0, :2].mean(axis=0)
        for row in range(3):
            np.testing.assert_allclose(out[0, row], expected, atol=1e-12)

    def test_matches_dense_enumeration_oracle(self):
        rng = np.random.default_rng(4)
        L, D, heads = 3, 4, 2
        params = {f"a_{n}": rng.normal(size=(D, D)) for n in ("wq", "wk", "wv", "wo")}
        params |= {f"a_{n}": rng.normal(size=D) for n in ("bq", "bk", "bv", "bo")}
        x = rng.normal(size=(1, L, D))
        mask = np.array([[False, False, False]])
        out, _ = attention_forward(x, x, mask, params, "a", heads=heads)

        # independent scalar-loop recomputation
        q = x[0] @ params["a_wq"] + params["a_bq"]
        k = x[0] @ params["a_wk"] + params["a_bk"]
        v = x[0] @ params["a_wv"] + params["a_bv"]
        dh = D // heads
        merged = np.zeros((L, D))
        for h in range(heads):
            qs, ks, vs = (t[:, h * dh : (h + 1) * dh] for t in (q, k, v))
            for i in range(L):
                logits = np.array([qs[i] @ ks[j] / np.sqrt(dh) for j in range(L)])
                w = np.exp(logits - logits.max())
                w /= w.sum()
                merged[i, h * dh : (h + 1) * dh] = sum(
                    w[j] * vs[j] for j in range(L)
                )
        expected = merged @ params["a_wo"] + params["a_bo"]
        np.testing.assert_allclose(out[0], expected, atol=1e-10)


class TestLayerNorm:
    def test_normalized_mean_zero_var_one(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(2, 3, 8)) * 4.0 + 1.5
        out, (normed, _, _) = layer_norm_forward(x, np.ones(8), np.zeros(8))
        np.testing.assert_allclose(normed.mean(axis=-1), 0.0, atol=1e-10)
        np.testing.assert_allclose(normed.var(axis=-1), 1.0, atol=1e-4)


class TestHeads:
    def test_constant_rows_pool_to_constant(self):
        config = tiny_config()
        rng = np.random.default_rng(6)
        params = init_params(config, rng)
        row = rng.normal(size=config.dim)
        encoded = np.tile(row, (1, config.seq_len, 1))
        mask = np.zeros((1, config.seq_len), dtype=bool)
        mask[0, 2:] = True
        coef, knot, (real, counts, _) = heads_forward(encoded, mask, params)
        pooled = (encoded[0] * real[0][:, None]).sum(axis=0) / counts[0]
        np.testing.assert_allclose(pooled, row, atol=1e-14)

    def test_zero_final_weights_output_bias(self):
        config = tiny_config()
        rng = np.random.default_rng(7)
        params = init_params(config, rng)
        params["coef_w2"] = np.zeros_like(params["coef_w2"])
        params["coef_b2"] = rng.normal(size=config.coef_out)
        encoded = rng.normal(size=(1, config.seq_len, config.dim))
        mask = np.zeros((1, config.seq_len), dtype=bool)
        coef, _, _ = heads_forward(encoded, mask, params)
        np.testing.assert_array_equal(coef[0], params["coef_b2"])

    def test_hand_computed_chain(self):
        config = tiny_config()
        rng = np.random.default_rng(8)
        params = init_params(config, rng)
        encoded = rng.normal(size=(1, config.seq_len, config.dim))
        mask = np.zeros((1, config.seq_len), dtype=bool)
        coef, knot, _ = heads_forward(encoded, mask, params)
        pooled = encoded[0].mean(axis=0)
        h = np.maximum(pooled @ params["knot_w1"] + params["knot_b1"], 0.0)
        expected = h @ params["knot_w2"] + params["knot_b2"]
        np.testing.assert_allclose(knot[0], expected, atol=1e-12)


class TestMaskingInvariance:
    @pytest.mark.parametrize("seed", range(10))
    def test_padding_contents_change_nothing(self, seed):
        config = tiny_config()
        rng = np.random.default_rng(seed)
        params = init_params(config, rng)
        I = int(rng.integers(2, 4))
        sv, sm, cv, cm = batch_inputs(rng, config, I=I)
        coef, knot, _ = forward(params, config, sv, sm, cv, cm)
        sv2 = sv.copy()
        cv2 = cv.copy()
        sv2[sm] = rng.normal(size=int(sm.sum()))
        cv2[cm] = rng.normal(size=int(cm.sum()))
        coef2, knot2, _ = forward(params, config, sv2, sm, cv2, cm)
        np.testing.assert_array_equal(coef, coef2)
        np.testing.assert_array_equal(knot, knot2)

    def test_inference_bitwise_repeatable(self):
        config = tiny_config()
        rng = np.random.default_rng(11)
        params = init_params(config, rng)
        sv, sm, cv, cm = batch_inputs(rng, config)
        a = forward(params, config, sv, sm, cv, cm)
        b = forward(params, config, sv, sm, cv, cm)
        np.testing.assert_array_equal(a[0], b[0])
        np.testing.assert_array_equal(a[1], b[1])


class TestEncoderReductions:
    def test_zero_context_layers_identity(self):
        config = ModelConfig(joints=2, max_waypoints=3, dim=4, heads=1,
                             context_layers=0, source_layers=1, dropout=0.0)
        rng = np.random.default_rng(12)
        params = init_params(config, rng)
        x = rng.normal(size=(1, config.seq_len, config.dim))
        mask = np.zeros((1, config.seq_len), dtype=bool)
        out, _ = context_encoder_forward(x, mask, params, config, None, False)
        np.testing.assert_array_equal(out, x)

    def test_zero_sublayers_reduce_to_double_layer_norm(self):
        config = tiny_config()
        rng = np.random.default_rng(13)
        params = init_params(config, rng)
        for n in ("wq", "wk", "wv", "wo", "bq", "bk", "bv", "bo"):
            params[f"ctx0_attn_{n}"] = np.zeros_like(params[f"ctx0_attn_{n}"])
        for n in ("ffn_w1", "ffn_b1", "ffn_w2", "ffn_b2"):
            params[f"ctx0_{n}"] = np.zeros_like(params[f"ctx0_{n}"])
        for ln in ("ln1", "ln2"):
            params[f"ctx0_{ln}_gain"] = np.ones_like(params[f"ctx0_{ln}_gain"])
            params[f"ctx0_{ln}_bias"] = np.zeros_like(params[f"ctx0_{ln}_bias"])
        x = rng.normal(size=(1, config.seq_len, config.dim))
        mask = np.zeros((1, config.seq_len), dtype=bool)
        out, _ = context_encoder_forward(x, mask, params, config, None, False)
        ln1, _ = layer_norm_forward(x, np.ones(4), np.zeros(4))
        ln2, _ = layer_norm_forward(ln1, np.ones(4), np.zeros(4))
        np.testing.assert_allclose(out, ln2, atol=1e-12)

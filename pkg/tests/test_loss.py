import numpy as np
import pytest

from tjplan.model import composite_loss, smooth_l1, smooth_l1_grad


class TestSmoothL1Table:
    # hand-computed closed-form cases, exact to 1e-15
    CASES = [
        (0.0, 0.0),
        (0.5, 0.125),  # 0.5 * 0.5^2
        (-0.5, 0.125),
        (0.999, 0.5 * 0.999**2),
        (1.0, 0.5),  # |x| - 0.5 branch at the knee
        (2.0, 1.5),
        (-2.0, 1.5),
        (10.0, 9.5),
    ]

    @pytest.mark.parametrize("x,expected", CASES)
    def test_branch_values(self, x, expected):
        assert abs(float(smooth_l1(np.array([x]))[0]) - expected) <= 1e-15

    def test_gradient_branches(self):
        xs = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
        np.testing.assert_array_equal(
            smooth_l1_grad(xs), np.array([-1.0, -0.5, 0.0, 0.5, 1.0])
        )


class TestCompositeLoss:
    def test_exact_match_is_zero(self):
        coef = np.array([[1.0, 2.0, 3.0]])
        knot = np.array([[0.0, 1.0, 2.0, 3.0]])
        loss, gc, gk = composite_loss(coef, knot, coef, knot, [3], [4])
        assert loss == 0.0
        np.testing.assert_array_equal(gc, np.zeros_like(gc))

    def test_single_coef_diff_half(self):
        pred = np.array([[0.5]])
        target = np.array([[0.0]])
        knot = np.array([[0.0]])
        loss, _, _ = composite_loss(pred, knot, target, knot, [1], [1], 1.0, 0.0)
        assert loss == pytest.approx(0.125, abs=1e-15)

    def test_single_coef_diff_two(self):
        pred = np.array([[2.0]])
        target = np.array([[0.0]])
        knot = np.array([[0.0]])
        loss, _, _ = composite_loss(pred, knot, target, knot, [1], [1], 1.0, 0.0)
        assert loss == pytest.approx(1.5, abs=1e-15)

    def test_knot_diff_two_adds_two(self):
        coef = np.array([[0.0]])
        pred_k = np.array([[2.0]])
        target_k = np.array([[0.0]])
        loss, _, _ = composite_loss(coef, pred_k, coef, target_k, [1], [1], 1.0, 1.0)
        assert loss == pytest.approx(2.0, abs=1e-15)

    def test_only_valid_prefix_counted(self):
        pred = np.array([[1.0, 99.0]])
        target = np.array([[1.0, 0.0]])
        knot = np.array([[0.0, 0.0]])
        loss, gc, _ = composite_loss(pred, knot, target, knot, [1], [1])
        assert loss == 0.0
        assert gc[0, 1] == 0.0

    def test_theta_weights_scale(self):
        coef_p = np.array([[0.5]])
        coef_t = np.array([[0.0]])
        knot_p = np.array([[1.0]])
        knot_t = np.array([[0.0]])
        loss, _, _ = composite_loss(coef_p, knot_p, coef_t, knot_t, [1], [1], 2.0, 3.0)
        assert loss == pytest.approx(2.0 * 0.125 + 3.0 * 1.0, abs=1e-15)

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(0)
        pred_c = rng.normal(size=(2, 5))
        pred_k = rng.normal(size=(2, 7))
        tgt_c = rng.normal(size=(2, 5))
        tgt_k = rng.normal(size=(2, 7))
        lens_c, lens_k = [4, 5], [6, 7]
        loss, gc, gk = composite_loss(pred_c, pred_k, tgt_c, tgt_k, lens_c, lens_k)
        h = 1e-7
        for (arr, grad) in ((pred_c, gc), (pred_k, gk)):
            for idx in np.ndindex(arr.shape):
                orig = arr[idx]
                arr[idx] = orig + h
                lp, _, _ = composite_loss(pred_c, pred_k, tgt_c, tgt_k, lens_c, lens_k)
                arr[idx] = orig - h
                lm, _, _ = composite_loss(pred_c, pred_k, tgt_c, tgt_k, lens_c, lens_k)
                arr[idx] = orig
                fd = (lp - lm) / (2 * h)
                assert abs(fd - grad[idx]) < 1e-6

    def test_negative_weights_rejected(self):
        a = np.zeros((1, 1))
        with pytest.raises(ValueError):
            composite_loss(a, a, a, a, [1], [1], -1.0, 0.0)

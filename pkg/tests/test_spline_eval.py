import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import constant_trajectory, random_trajectory
from oracles import central_difference, spline_value_brute
from tjplan.spline.evaluate import basis, eval_spline
from tjplan.spline.types import JointSpline, KnotVector, SplineTrajectory


class TestBasis:
    def test_clamped_start(self, rng):
        traj = random_trajectory(rng)
        first, vals = basis(traj.knots, 0.0)
        assert first == 0
        np.testing.assert_allclose(vals, [1, 0, 0, 0, 0, 0], atol=0)

    def test_clamped_end(self, rng):
        traj = random_trajectory(rng)
        _, vals = basis(traj.knots, traj.duration)
        assert vals[-1] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(vals[:-1], 0.0, atol=1e-12)

    def test_matches_cox_de_boor_recursion(self, rng):
        for _ in range(20):
            traj = random_trajectory(rng)
            t = rng.uniform(0.0, traj.duration)
            first, vals = basis(traj.knots, t)
            knots = traj.knots.knots
            for j, v in enumerate(vals):
                expected = spline_value_brute(
                    knots, np.eye(traj.knots.control_point_count)[first + j], t
                )
                assert v == pytest.approx(expected, abs=1e-12)

    def test_partition_of_unity(self, rng):
        traj = random_trajectory(rng)
        for t in rng.uniform(0.0, traj.duration, size=50):
            _, vals = basis(traj.knots, t)
            assert np.all(vals >= 0.0)
            assert vals.sum() == pytest.approx(1.0, abs=1e-12)

    def test_outside_domain_rejected(self, rng):
        traj = random_trajectory(rng)
        with pytest.raises(ValueError):
            basis(traj.knots, -0.1)
        with pytest.raises(ValueError):
            basis(traj.knots, traj.duration + 0.1)


class TestEval:
    def test_constant_spline(self, rng):
        traj = constant_trajectory(value=0.7)
        for t in rng.uniform(0.0, traj.duration, size=10):
            assert eval_spline(traj, 0, t, 0) == pytest.approx(0.7, abs=1e-13)

    def test_clamped_endpoints(self, rng):
        traj = random_trajectory(rng)
        for k in range(traj.joint_count):
            cp = traj.joints[k].control_points
            assert eval_spline(traj, k, 0.0, 0) == pytest.approx(cp[0], abs=1e-12)
            assert eval_spline(traj, k, traj.duration, 0) == pytest.approx(cp[-1], abs=1e-12)

    def test_value_matches_brute_force(self, rng):
        for _ in range(50):
            traj = random_trajectory(rng)
            t = rng.uniform(0.0, traj.duration)
            k = int(rng.integers(traj.joint_count))
            expected = spline_value_brute(
                traj.knots.knots, traj.joints[k].control_points, t
            )
            assert abs(eval_spline(traj, k, t, 0) - expected) < 1e-10

    @pytest.mark.parametrize("order", [1, 2, 3])
    def test_derivatives_match_finite_differences(self, rng, order):
        for _ in range(30):
            traj = random_trajectory(rng)
            t = rng.uniform(0.05 * traj.duration, 0.95 * traj.duration)
            k = int(rng.integers(traj.joint_count))
            fd = central_difference(lambda u: eval_spline(traj, k, u, order - 1), t)
            exact = eval_spline(traj, k, t, order)
            assert fd == pytest.approx(exact, rel=1e-5, abs=1e-6)

    def test_invalid_inputs(self, rng):
        traj = random_trajectory(rng)
        with pytest.raises(ValueError):
            eval_spline(traj, 0, traj.duration + 1.0, 0)
        with pytest.raises(IndexError):
            eval_spline(traj, traj.joint_count + 3, 0.5, 0)
        with pytest.raises(ValueError):
            eval_spline(traj, 0, 0.5, 4)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), frac=st.floats(0.0, 1.0))
def test_partition_of_unity_property(seed, frac):
    rng = np.random.default_rng(seed)
    traj = random_trajectory(rng)
    _, vals = basis(traj.knots, frac * traj.duration)
    assert np.all(vals >= -1e-15)
    assert vals.sum() == pytest.approx(1.0, abs=1e-12)


def test_type_invariants():
    with pytest.raises(ValueError):
        KnotVector(np.array([0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0.5]))
    with pytest.raises(ValueError):
        KnotVector(np.zeros(12))  # T must be positive
    with pytest.raises(ValueError):
        JointSpline(np.array([1.0, 2.0]))
    kv = KnotVector(np.concatenate([np.zeros(6), np.ones(6)]))
    with pytest.raises(ValueError):
        SplineTrajectory(kv, (JointSpline(np.zeros(7)),))

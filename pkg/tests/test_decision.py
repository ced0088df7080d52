import numpy as np
import pytest

from conftest import random_trajectory
from tjplan.plan import DecisionVector, decode, encode
from tjplan.plan.decision import knot_vector_from_durations, waypoint_times


class TestDecisionVector:
    def test_flatten_order_durations_then_joint_major(self):
        dv = DecisionVector(
            np.array([1.0, 2.0]),
            np.arange(14, dtype=float).reshape(2, 7),
        )
        flat = dv.flatten()
        np.testing.assert_array_equal(flat[:2], [1.0, 2.0])
        np.testing.assert_array_equal(flat[2:9], np.arange(7.0))
        np.testing.assert_array_equal(flat[9:], np.arange(7.0, 14.0))

    def test_from_flat_round_trip(self):
        dv = DecisionVector(np.array([0.5, 0.25, 1.5]), np.ones((3, 8)))
        back = DecisionVector.from_flat(dv.flatten(), waypoints=4, joints=3)
        np.testing.assert_array_equal(back.span_durations, dv.span_durations)
        np.testing.assert_array_equal(back.control_points, dv.control_points)

    def test_rejects_tiny_duration(self):
        with pytest.raises(ValueError):
            DecisionVector(np.array([1e-6]), np.zeros((1, 6)))

    def test_rejects_inconsistent_shapes(self):
        with pytest.raises(ValueError):
            DecisionVector(np.array([1.0, 1.0]), np.zeros((2, 6)))


class TestKnotConstruction:
    def test_unit_durations_six_waypoints(self):
        kv = knot_vector_from_durations(np.ones(5))
        assert kv.duration == 5.0
        np.testing.assert_array_equal(kv.knots[:6], np.zeros(6))
        np.testing.assert_array_equal(kv.knots[6:10], [1.0, 2.0, 3.0, 4.0])
        np.testing.assert_array_equal(kv.knots[10:], np.full(6, 5.0))

    def test_waypoint_times_are_cumulative_sums(self):
        rng = np.random.default_rng(7)
        d = rng.uniform(0.2, 2.0, size=9)
        t = waypoint_times(d)
        assert t[0] == 0.0
        # exact reconstruction: each step adds one duration
        acc = 0.0
        for i in range(9):
            acc += d[i]
            assert t[i + 1] == acc


class TestEncodeDecode:
    @pytest.mark.parametrize("seed", range(20))
    def test_round_trip_bitwise(self, seed):
        rng = np.random.default_rng(seed)
        I = int(rng.integers(2, 10))
        K = int(rng.integers(1, 5))
        durations = rng.uniform(0.1, 3.0, size=I - 1)
        ctrl = rng.normal(size=(K, I + 4))
        traj = decode(DecisionVector(durations, ctrl))
        back = encode(traj)
        again = decode(back)
        np.testing.assert_array_equal(again.knots.knots, traj.knots.knots)
        np.testing.assert_array_equal(again.control_matrix(), traj.control_matrix())

    def test_decode_pins_waypoints_to_knots(self):
        durations = np.array([0.5, 1.25, 0.75])
        traj = decode(DecisionVector(durations, np.zeros((2, 8))))
        times = waypoint_times(durations)
        # interior waypoints sit exactly on the interior knots
        np.testing.assert_array_equal(traj.knots.knots[6:8], times[1:3])

    def test_encode_random_spline_trajectory(self, rng):
        traj = random_trajectory(rng, n_joints=3, n_spans=4)
        dv = encode(traj)
        again = decode(dv)
        np.testing.assert_array_equal(again.knots.knots, traj.knots.knots)
        np.testing.assert_array_equal(again.control_matrix(), traj.control_matrix())

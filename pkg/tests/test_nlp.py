import numpy as np
import pytest

from tjplan.exceptions import InfeasiblePathError
from tjplan.plan import build_nlp, cold_start, decode
from tjplan.plan.decision import waypoint_times
from tjplan.plan.nlp import TrajectoryNlp
from tjplan.plan.planner import PlanRequest
from tjplan.spline.functionals import (
    boundary_residuals,
    interpolation_residuals,
    scalar_objective,
)
from tjplan.sqp.solver import _finite_diff_jacobian, finite_diff_gradient

from test_coldstart import desk_limits


def random_problem(seed, I=5, K=3, lam=0.5):
    rng = np.random.default_rng(seed)
    from tjplan.spline.types import WaypointPath

    path = WaypointPath(rng.uniform(-2.0, 2.0, size=(I, K)))
    nlp = TrajectoryNlp(path, desk_limits(K), lam)
    x0 = cold_start(path, desk_limits(K)).flatten()
    return nlp, x0, rng


class TestValues:
    def test_objective_matches_functionals(self):
        nlp, x0, _ = random_problem(0)
        traj = decode(cold_start(nlp.path, nlp.limits))
        assert nlp.objective(x0) == pytest.approx(
            scalar_objective(traj, 0.5), rel=1e-12
        )

    def test_equalities_near_zero_at_cold_start(self):
        nlp, x0, _ = random_problem(1)
        assert np.abs(nlp.eq(x0)).max() < 1e-9

    def test_equality_values_match_functionals(self):
        nlp, x0, rng = random_problem(2)
        x = x0 + 0.05 * rng.normal(size=len(x0))
        x[: nlp.spans] = np.abs(x[: nlp.spans]) + 0.05
        dv_durations = x[: nlp.spans]
        traj = decode_from_flat(nlp, x)
        times = waypoint_times(dv_durations)
        interp = interpolation_residuals(traj, nlp.path, times).ravel()
        bnd = boundary_residuals(traj)
        np.testing.assert_allclose(nlp.eq(x), np.concatenate([interp, bnd]), atol=1e-12)

    def test_infeasible_path_rejected_before_solving(self):
        from tjplan.spline.types import WaypointPath

        path = WaypointPath(np.array([[0.0, 0.0], [5.0, 0.0]]))
        req = PlanRequest(path=path, limits=desk_limits(2), lam=0.5)
        with pytest.raises(InfeasiblePathError):
            build_nlp(req)

    def test_counts_consistent(self):
        nlp, x0, _ = random_problem(3)
        p = nlp.as_problem()
        assert len(p.eval_eq(x0)) == p.eq_count
        assert len(p.eval_ineq(x0)) == p.ineq_count
        assert p.eval_eq_jac(x0).shape == (p.eq_count, p.n)
        assert p.eval_ineq_jac(x0).shape == (p.ineq_count, p.n)


def decode_from_flat(nlp, x):
    from tjplan.plan import DecisionVector

    return decode(DecisionVector.from_flat(x, nlp.I, nlp.K))


class TestGradients:
    @pytest.mark.parametrize("seed,lam", [(0, 0.5), (1, 0.0), (2, 1.0), (3, 0.3)])
    def test_objective_gradient_matches_fd(self, seed, lam):
        nlp, x0, rng = random_problem(seed, lam=lam)
        x = x0 + 0.03 * rng.normal(size=len(x0))
        x[: nlp.spans] = np.abs(x[: nlp.spans]) + 0.1
        g = nlp.gradient(x)
        g_fd = finite_diff_gradient(nlp.objective, x, 1e-6)
        scale = max(1.0, np.abs(g_fd).max())
        np.testing.assert_allclose(g / scale, g_fd / scale, atol=1e-5)

    @pytest.mark.parametrize("seed", range(3))
    def test_equality_jacobian_matches_fd(self, seed):
        nlp, x0, rng = random_problem(seed, I=4)
        x = x0 + 0.03 * rng.normal(size=len(x0))
        x[: nlp.spans] = np.abs(x[: nlp.spans]) + 0.1
        Je = nlp.eq_jac(x)
        Je_fd = _finite_diff_jacobian(nlp.eq, x, 1e-6)
        np.testing.assert_allclose(Je, Je_fd, atol=1e-5)

    @pytest.mark.parametrize("seed", range(3))
    def test_inequality_jacobian_matches_fd(self, seed):
        nlp, x0, rng = random_problem(seed, I=4)
        x = x0 + 0.03 * rng.normal(size=len(x0))
        x[: nlp.spans] = np.abs(x[: nlp.spans]) + 0.1
        Ji = nlp.ineq_jac(x)
        Ji_fd = _finite_diff_jacobian(nlp.ineq, x, 1e-6)
        # rows where some |value| is near zero have a kink; skip those
        vals_at = nlp.ineq(x)
        smooth = np.ones(len(vals_at), dtype=bool)
        limits = nlp.margined.repeat(nlp.nt, axis=0).reshape(nlp.K, nlp.nt, 4).ravel()
        smooth &= np.abs(limits - vals_at) > 1e-4  # |value| away from 0
        np.testing.assert_allclose(Ji[smooth], Ji_fd[smooth], atol=1e-5)

    def test_gradient_deterministic(self):
        nlp, x0, _ = random_problem(7)
        np.testing.assert_array_equal(nlp.gradient(x0), nlp.gradient(x0))

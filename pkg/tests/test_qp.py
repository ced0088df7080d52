import itertools

import numpy as np
import pytest

from tjplan.sqp.qp import QpInfeasible, qp_step, solve_qp


def enumerate_qp_oracle(H, g, A_eq, b_eq, A_in, b_in):
    """Try every active set; return the best KKT-consistent feasible point."""
    n = len(g)
    p = len(b_eq)
    m = len(b_in)
    best = None
    for size in range(m + 1):
        for S in itertools.combinations(range(m), size):
            A_act = np.vstack([A_eq, A_in[list(S)]]) if (p or S) else np.zeros((0, n))
            b_act = np.concatenate([b_eq, b_in[list(S)]])
            k = len(b_act)
            KKT = np.block([[H, A_act.T], [A_act, np.zeros((k, k))]])
            rhs = np.concatenate([-g, b_act])
            try:
                sol = np.linalg.solve(KKT, rhs)
            except np.linalg.LinAlgError:
                continue
            x, mult = sol[:n], sol[n:]
            mu = -mult[p:]  # KKT block solves H x + A' mult = -g, so mult = -mu
            if np.any(mu < -1e-9):
                continue
            if m and np.any(A_in @ x < b_in - 1e-9):
                continue
            obj = 0.5 * x @ H @ x + g @ x
            if best is None or obj < best[0] - 1e-12:
                best = (obj, x)
    return best


class TestQpStep:
    def test_unconstrained_newton(self):
        d, lam, mu = qp_step(np.eye(2), np.array([-1.0, 0.0]), None, None, None, None)
        np.testing.assert_allclose(d, [1.0, 0.0], atol=1e-12)

    def test_clipped_newton_step(self):
        # d1 <= 0.5 expressed as -d1 + 0.5 >= 0
        d, lam, mu = qp_step(
            np.eye(2), np.array([-2.0, 0.0]),
            None, None,
            np.array([[-1.0, 0.0]]), np.array([0.5]),
        )
        np.testing.assert_allclose(d, [0.5, 0.0], atol=1e-12)
        assert mu[0] == pytest.approx(1.5, abs=1e-10)

    def test_equality_only(self):
        # min 1/2 d'd - d1 s.t. d1 + d2 = 1
        d, lam, mu = qp_step(
            np.eye(2), np.array([-1.0, 0.0]),
            np.array([[1.0, 1.0]]), np.array([-1.0]),
            None, None,
        )
        np.testing.assert_allclose(d, [1.0, 0.0], atol=1e-10)

    def test_bounds_folded(self):
        lo = np.array([-0.1, -0.1])
        hi = np.array([0.1, 0.1])
        d, _, _ = qp_step(np.eye(2), np.array([-3.0, 2.0]), None, None, None, None,
                          bounds=(lo, hi))
        np.testing.assert_allclose(d, [0.1, -0.1], atol=1e-12)


class TestSolveQpAgainstEnumeration:
    @pytest.mark.parametrize("seed", range(20))
    def test_random_convex_qp(self, seed):
        rng = np.random.default_rng(seed)
        n, m = 5, 3
        A = rng.normal(size=(n, n))
        H = A @ A.T + n * np.eye(n)
        g = rng.normal(size=n)
        A_in = rng.normal(size=(m, n))
        b_in = rng.normal(size=m) - 1.0
        expected = enumerate_qp_oracle(H, g, np.zeros((0, n)), np.zeros(0), A_in, b_in)
        assert expected is not None
        sol = solve_qp(H, g, None, None, A_in, b_in)
        np.testing.assert_allclose(sol.x, expected[1], atol=1e-8)
        obj = 0.5 * sol.x @ H @ sol.x + g @ sol.x
        assert obj == pytest.approx(expected[0], abs=1e-8)

    @pytest.mark.parametrize("seed", range(10))
    def test_with_equalities(self, seed):
        rng = np.random.default_rng(100 + seed)
        n, p, m = 4, 1, 2
        A = rng.normal(size=(n, n))
        H = A @ A.T + n * np.eye(n)
        g = rng.normal(size=n)
        A_eq = rng.normal(size=(p, n))
        b_eq = rng.normal(size=p)
        A_in = rng.normal(size=(m, n))
        b_in = rng.normal(size=m) - 2.0
        expected = enumerate_qp_oracle(H, g, A_eq, b_eq, A_in, b_in)
        assert expected is not None
        sol = solve_qp(H, g, A_eq, b_eq, A_in, b_in)
        np.testing.assert_allclose(sol.x, expected[1], atol=1e-8)

    def test_stationarity_of_multipliers(self):
        rng = np.random.default_rng(7)
        n, m = 4, 6
        H = np.eye(n)
        g = rng.normal(size=n)
        A_in = rng.normal(size=(m, n))
        b_in = rng.normal(size=m)
        sol = solve_qp(H, g, None, None, A_in, b_in)
        # H x + g = A_in' mu with mu >= 0 and complementary slackness
        resid = H @ sol.x + g - A_in.T @ sol.ineq_multipliers
        np.testing.assert_allclose(resid, 0.0, atol=1e-9)
        assert np.all(sol.ineq_multipliers >= -1e-12)
        slack = A_in @ sol.x - b_in
        np.testing.assert_allclose(slack * sol.ineq_multipliers, 0.0, atol=1e-8)

    def test_infeasible_detected(self):
        # x >= 1 and -x >= 0 cannot both hold
        with pytest.raises(QpInfeasible):
            solve_qp(np.eye(1), np.zeros(1), None, None,
                     np.array([[1.0], [-1.0]]), np.array([1.0, 0.0]))

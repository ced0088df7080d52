"""Assembly of the trajectory NLP with analytic derivatives.

Variables are the decision vector layout from `tjplan.plan.decision`:
(I-1) span durations, then K*(I+4) control points joint-major.  The
objective is lam * J + (1 - lam) * T where J is the total-jerk
functional; equalities are the waypoint interpolation and rest-to-rest
boundary residuals; inequalities are margin-scaled kinematic residuals
on a per-span collocation grid.  All derivatives are exact, obtained by
pushing duals (value + partials w.r.t. span durations) through the
basis-function recursion.
"""

from __future__ import annotations

import numpy as np

from tjplan.exceptions import InfeasiblePathError, NumericalBreakdownError
from tjplan.plan.decision import waypoint_times
from tjplan.spline import kernels
from tjplan.spline.functionals import GAUSS_W, GAUSS_X
from tjplan.spline.types import DEGREE, MIN_SPAN, RobotLimits, WaypointPath
from tjplan.sqp.problem import NlpProblem

_WINDOW = np.arange(-DEGREE, 1)  # control-point window of one basis row

# Below this squared-jerk level a joint's contribution to J is treated
# as exactly zero: sqrt has unbounded slope at 0 and the true gradient
# direction there is meaningless noise.
_JERK_EPS = 1e-18


class TrajectoryNlp:
    """Evaluates the trajectory NLP and its exact derivatives, with caching.

    Function values need only plain basis evaluations; gradients and
    Jacobians additionally push duals through the recursion, so the two
    are computed and cached separately (the solver asks for values alone
    during line searches).
    """

    def __init__(
        self,
        path: WaypointPath,
        limits: RobotLimits,
        lam: float,
        margin: float = 0.99,
        collocation_density: int = 5,
    ):
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"balancing parameter must be in [0, 1], got {lam}")
        if not 0.0 < margin <= 1.0:
            raise ValueError(f"safety margin must be in (0, 1], got {margin}")
        if collocation_density < 3:
            raise ValueError("collocation density must be at least 3 points per span")
        if path.joint_count != limits.joint_count:
            raise ValueError(
                f"path has {path.joint_count} joints, limits have {limits.joint_count}"
            )
        if not path.within_limits(limits):
            raise InfeasiblePathError("a waypoint exceeds the position limits")

        self.path = path
        self.limits = limits
        self.lam = float(lam)
        self.margin = float(margin)
        self.density = int(collocation_density)

        I, K = path.waypoint_count, path.joint_count
        self.I, self.K = I, K
        self.spans = p = I - 1
        self.M = M = I + 4
        self.n = p + K * M
        self.eq_count = I * K + 4 * K
        self.margined = self.margin * limits.stacked()  # (K, 4)

        # partials of each knot w.r.t. the span durations
        N = I + 10
        dknots = np.zeros((N, p))
        for j in range(DEGREE + 1, DEGREE + I):  # interior knots
            dknots[j, : j - DEGREE] = 1.0
        dknots[DEGREE + I :, :] = 1.0
        self.dknots = dknots

        # partials of the waypoint times (cumulative duration sums)
        self.dt_wp = np.zeros((I, p))
        for i in range(I):
            self.dt_wp[i, :i] = 1.0

        # collocation grid: span endpoints plus interior Gauss nodes,
        # stored as (span index, fraction into span); endpoints belong
        # to the waypoint-time vector directly.
        interior = np.polynomial.legendre.leggauss(self.density - 2)[0]
        fr = (np.sort(interior) + 1.0) / 2.0
        kinds = []  # (is_break, break_index, span, fraction)
        for s in range(p):
            kinds.append((True, s, s, 0.0))
            for g in fr:
                kinds.append((False, 0, s, float(g)))
        kinds.append((True, p, p - 1, 1.0))
        self.grid_is_break = np.array([k[0] for k in kinds])
        self.grid_break = np.array([k[1] for k in kinds], dtype=np.int64)
        self.grid_span = np.array([k[2] for k in kinds], dtype=np.int64)
        self.grid_frac = np.array([k[3] for k in kinds])
        self.nt = len(kinds)
        self.ineq_count = K * self.nt * 4

        # jerk quadrature nodes: 3-point Gauss per span (exact)
        self.jerk_span = np.repeat(np.arange(p), 3)
        self.jerk_frac = np.tile((GAUSS_X + 1.0) / 2.0, p)
        self.jerk_wbase = np.tile(GAUSS_W / 2.0, p)  # times d_s gives the weight

        self._value_cache: dict[bytes, tuple] = {}
        self._grad_cache: dict[bytes, np.ndarray] = {}
        self._cjac_cache: dict[bytes, tuple] = {}

    # -- decoding ---------------------------------------------------------

    def _split(self, x):
        x = np.asarray(x, dtype=np.float64)
        d = x[: self.spans]
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise NumericalBreakdownError(
                "knot spans collapsed during evaluation",
                context={"min_span": float(d.min(initial=np.nan))},
            )
        ctrl = x[self.spans :].reshape(self.K, self.M)
        t_wp = waypoint_times(d)
        knots = np.concatenate(
            [np.zeros(DEGREE + 1), t_wp[1:-1], np.full(DEGREE + 1, t_wp[-1])]
        )
        return d, ctrl, t_wp, knots

    def _grid_times(self, d, t_wp):
        times = np.where(
            self.grid_is_break,
            t_wp[self.grid_break],
            t_wp[self.grid_span] + d[self.grid_span] * self.grid_frac,
        )
        return times

    def _grid_dtimes(self):
        dt = self.dt_wp[np.where(self.grid_is_break, self.grid_break, self.grid_span)]
        dt = dt.copy()
        interior = ~self.grid_is_break
        idx = np.nonzero(interior)[0]
        dt[idx, self.grid_span[idx]] += self.grid_frac[idx]
        return dt

    def _jerk_times(self, d, t_wp):
        return t_wp[self.jerk_span] + d[self.jerk_span] * self.jerk_frac

    def _jerk_dtimes(self):
        dt = self.dt_wp[self.jerk_span].copy()
        dt[np.arange(len(self.jerk_span)), self.jerk_span] += self.jerk_frac
        return dt

    @staticmethod
    def _windows(ctrl, spans):
        return ctrl[:, spans[:, None] + _WINDOW[None, :]]  # (K, nt, 6)

    # -- values -----------------------------------------------------------

    def _values(self, x):
        key = np.asarray(x, dtype=np.float64).tobytes()
        hit = self._value_cache.get(key)
        if hit is not None:
            return hit
        d, ctrl, t_wp, knots = self._split(x)
        T = t_wp[-1]

        spans_g, ders_g = kernels.basis_grid(knots, DEGREE, self._grid_times(d, t_wp), 3)
        vals_g = np.einsum("arm,kam->kar", ders_g, self._windows(ctrl, spans_g))
        ci = (self.margined[:, None, :] - np.abs(vals_g)).ravel()

        spans_w, ders_w = kernels.basis_grid(knots, DEGREE, t_wp, 2)
        vals_w = np.einsum("arm,kam->kar", ders_w, self._windows(ctrl, spans_w))
        interp = (vals_w[:, :, 0].T - self.path.waypoints).ravel()
        boundary = np.stack(
            [vals_w[:, 0, 1], vals_w[:, -1, 1], vals_w[:, 0, 2], vals_w[:, -1, 2]],
            axis=1,
        ).ravel()
        ce = np.concatenate([interp, boundary])

        spans_j, ders_j = kernels.basis_grid(knots, DEGREE, self._jerk_times(d, t_wp), 3)
        jerk = np.einsum("am,kam->ka", ders_j[:, 3, :], self._windows(ctrl, spans_j))
        wq = d[self.jerk_span] * self.jerk_wbase
        jerk_int = (jerk**2) @ wq  # (K,)
        J = float(np.sum(np.sqrt(jerk_int / T)))
        f = self.lam * J + (1.0 - self.lam) * T

        out = (f, ce, ci, J, T)
        self._value_cache[key] = out
        if len(self._value_cache) > 16:
            self._value_cache.pop(next(iter(self._value_cache)))
        return out

    # -- objective gradient -------------------------------------------------

    def _gradient(self, x):
        key = np.asarray(x, dtype=np.float64).tobytes()
        hit = self._grad_cache.get(key)
        if hit is not None:
            return hit
        d, ctrl, t_wp, knots = self._split(x)
        T = t_wp[-1]
        p, K, M, n = self.spans, self.K, self.M, self.n

        spans_j, ders_j, dders_j = kernels.basis_grid_dual(
            knots, self.dknots, DEGREE, self._jerk_times(d, t_wp), self._jerk_dtimes(), 3
        )
        w = self._windows(ctrl, spans_j)
        jerk = np.einsum("am,kam->ka", ders_j[:, 3, :], w)  # (K, 3p)
        djerk = np.einsum("amp,kam->kap", dders_j[:, 3, :, :], w)  # (K, 3p, p)

        wq = d[self.jerk_span] * self.jerk_wbase  # (3p,)
        dwq = np.zeros((len(wq), p))
        dwq[np.arange(len(wq)), self.jerk_span] = self.jerk_wbase

        jerk_int = (jerk**2) @ wq  # (K,)
        # dI_k/dd: quadrature-weight motion plus integrand motion
        dint_dd = (jerk**2) @ dwq + 2.0 * np.einsum("ka,kap,a->kp", jerk, djerk, wq)
        # dI_k/dP: scatter through the active control-point windows
        dint_dP = np.zeros((K, K, M))
        contrib = 2.0 * wq[None, :, None] * jerk[:, :, None] * ders_j[None, :, 3, :]
        cols = spans_j[:, None] + _WINDOW[None, :]  # (3p, 6)
        for k in range(K):
            np.add.at(dint_dP[k, k], cols.ravel(), contrib[k].ravel())

        grad = np.zeros(n)
        grad[:p] += (1.0 - self.lam)  # dT/dd = 1
        z = jerk_int / T
        for k in range(K):
            s = np.sqrt(z[k]) if z[k] > _JERK_EPS else 0.0
            if s == 0.0:
                continue
            coeff = self.lam * 0.5 / s
            dz_dd = (dint_dd[k] * T - jerk_int[k]) / T**2
            grad[:p] += coeff * dz_dd
            grad[p:] += coeff * (dint_dP[k] / T).ravel()

        self._grad_cache[key] = grad
        if len(self._grad_cache) > 16:
            self._grad_cache.pop(next(iter(self._grad_cache)))
        return grad

    # -- constraint Jacobians -------------------------------------------------

    def _constraint_jacobians(self, x):
        key = np.asarray(x, dtype=np.float64).tobytes()
        hit = self._cjac_cache.get(key)
        if hit is not None:
            return hit
        d, ctrl, t_wp, knots = self._split(x)
        p, K, M, n, I, nt = self.spans, self.K, self.M, self.n, self.I, self.nt

        # inequality rows: one per (joint, grid point, order)
        spans_g, ders_g, dders_g = kernels.basis_grid_dual(
            knots, self.dknots, DEGREE, self._grid_times(d, t_wp), self._grid_dtimes(), 3
        )
        w = self._windows(ctrl, spans_g)
        vals = np.einsum("arm,kam->kar", ders_g, w)  # (K, nt, 4)
        dvals = np.einsum("armp,kam->karp", dders_g, w)  # (K, nt, 4, p)
        sign = np.sign(vals)

        Ji = np.zeros((self.ineq_count, n))
        Ji[:, :p] = (-sign[:, :, :, None] * dvals).reshape(self.ineq_count, p)
        rows = np.arange(self.ineq_count).reshape(K, nt, 4, 1)
        cols = (
            p
            + (np.arange(K) * M)[:, None, None, None]
            + (spans_g[:, None] + _WINDOW[None, :])[None, :, None, :]
        )  # (K, nt, 1, 6)
        Ji[rows, cols] = -sign[:, :, :, None] * ders_g[None, :, :, :]

        # equality rows: interpolation (waypoint-major) then boundary
        spans_w, ders_w, dders_w = kernels.basis_grid_dual(
            knots, self.dknots, DEGREE, t_wp, self.dt_wp, 2
        )
        ww = self._windows(ctrl, spans_w)
        dvals_w = np.einsum("armp,kam->karp", dders_w, ww)  # (K, I, 3, p)
        wcols = spans_w[:, None] + _WINDOW[None, :]  # (I, 6)

        Je = np.zeros((self.eq_count, n))
        irows = (np.arange(I)[:, None] * K + np.arange(K)[None, :])  # (I, K)
        Je[irows.ravel(), :p] = dvals_w[:, :, 0, :].transpose(1, 0, 2).reshape(I * K, p)
        icols = p + (np.arange(K) * M)[None, :, None] + wcols[:, None, :]  # (I, K, 6)
        Je[irows[:, :, None], icols] = ders_w[:, None, 0, :]

        base = I * K
        for b, (i_pt, order) in enumerate([(0, 1), (I - 1, 1), (0, 2), (I - 1, 2)]):
            r = base + np.arange(K) * 4 + b
            Je[r, :p] = dvals_w[:, i_pt, order, :]
            bcols = p + (np.arange(K) * M)[:, None] + wcols[i_pt][None, :]
            Je[r[:, None], bcols] = ders_w[i_pt, order, :][None, :]

        out = (Je, Ji)
        self._cjac_cache[key] = out
        if len(self._cjac_cache) > 8:
            self._cjac_cache.pop(next(iter(self._cjac_cache)))
        return out

    # -- NlpProblem wiring -----------------------------------------------------

    def objective(self, x) -> float:
        return self._values(x)[0]

    def gradient(self, x) -> np.ndarray:
        return self._gradient(x)

    def eq(self, x) -> np.ndarray:
        return self._values(x)[1]

    def eq_jac(self, x) -> np.ndarray:
        return self._constraint_jacobians(x)[0]

    def ineq(self, x) -> np.ndarray:
        return self._values(x)[2]

    def ineq_jac(self, x) -> np.ndarray:
        return self._constraint_jacobians(x)[1]

    def objective_parts(self, x) -> tuple[float, float]:
        """(J, T) at x."""
        vals = self._values(x)
        return vals[3], vals[4]

    def as_problem(self) -> NlpProblem:
        lower = np.concatenate(
            [np.full(self.spans, MIN_SPAN), np.full(self.K * self.M, -np.inf)]
        )
        return NlpProblem(
            n=self.n,
            objective=self.objective,
            gradient=self.gradient,
            eq_count=self.eq_count,
            eq=self.eq,
            eq_jac=self.eq_jac,
            ineq_count=self.ineq_count,
            ineq=self.ineq,
            ineq_jac=self.ineq_jac,
            lower=lower,
        )


def build_nlp(request) -> NlpProblem:
    """NlpProblem for a PlanRequest; raises InfeasiblePathError early."""
    return TrajectoryNlp(
        request.path,
        request.limits,
        request.lam,
        margin=request.margin,
        collocation_density=request.collocation_density,
    ).as_problem()

"""The SQP driver: QP steps, damped BFGS, l1 merit line search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from tjplan.exceptions import NumericalBreakdownError
from tjplan.sqp.bfgs import damped_bfgs_update
from tjplan.sqp.problem import NlpProblem, SolveStatus, SqpResult, SqpSettings
from tjplan.sqp.qp import QpInfeasible, qp_step


def finite_diff_gradient(f, x, h: float) -> np.ndarray:
    """Central-difference gradient, component-wise."""
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    if not np.all(np.isfinite(g)):
        raise NumericalBreakdownError("non-finite value in finite-difference gradient")
    return g


def _finite_diff_jacobian(fun, x, h):
    c0 = np.asarray(fun(x), dtype=np.float64)
    J = np.zeros((len(c0), len(x)))
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        J[:, i] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h)
    return J


@dataclass
class _Point:
    """All problem data evaluated at one iterate (bounds folded into ineq)."""

    x: np.ndarray
    f: float
    g: np.ndarray
    ce: np.ndarray
    Je: np.ndarray
    ci: np.ndarray
    Ji: np.ndarray

    @property
    def l1_violation(self) -> float:
        return float(np.sum(np.abs(self.ce)) + np.sum(np.maximum(0.0, -self.ci)))

    @property
    def max_violation(self) -> float:
        v_eq = float(np.abs(self.ce).max(initial=0.0))
        v_in = float(np.maximum(0.0, -self.ci).max(initial=0.0))
        return max(v_eq, v_in)

    def merit(self, penalty: float) -> float:
        return self.f + penalty * self.l1_violation


class _Model:
    """Evaluates the NLP with bound constraints appended as inequalities."""

    def __init__(self, problem: NlpProblem, settings: SqpSettings):
        self.problem = problem
        self.settings = settings
        self.used_numeric_jacobian = False
        lo, hi = problem.bounds_arrays()
        self.lo, self.hi = lo, hi
        eye = np.eye(problem.n)
        self.bound_jac = np.vstack([eye[np.isfinite(lo)], -eye[np.isfinite(hi)]])
        self.fin_lo = np.isfinite(lo)
        self.fin_hi = np.isfinite(hi)

    def evaluate(self, x) -> _Point:
        p = self.problem
        f = p.eval_objective(x)
        g = p.eval_gradient(x)
        ce = p.eval_eq(x)
        ci = p.eval_ineq(x)
        if p.eq is not None and p.eq_jac is None:
            Je = _finite_diff_jacobian(p.eq, x, self.settings.fd_step)
            self.used_numeric_jacobian = True
        else:
            Je = p.eval_eq_jac(x)
        if p.ineq is not None and p.ineq_jac is None:
            Ji = _finite_diff_jacobian(p.ineq, x, self.settings.fd_step)
            self.used_numeric_jacobian = True
        else:
            Ji = p.eval_ineq_jac(x)
        bvals = np.concatenate([x[self.fin_lo] - self.lo[self.fin_lo],
                                self.hi[self.fin_hi] - x[self.fin_hi]])
        ci = np.concatenate([ci, bvals])
        Ji = np.vstack([Ji, self.bound_jac])
        vals = np.concatenate([[f], g, ce, ci])
        if not np.all(np.isfinite(vals)):
            raise NumericalBreakdownError(
                "non-finite callback value", context={"x": np.array(x)}
            )
        return _Point(np.array(x), f, g, ce, Je, ci, Ji)


def _fd_initial_hessian(problem: NlpProblem, pt: _Point, settings: SqpSettings):
    """Objective Hessian probed by forward gradient differences at x0.

    Exact for quadratic objectives, so QPs posed as NLPs converge in a
    handful of iterations; eigenvalues are clipped to keep H positive
    definite for nonconvex objectives.
    """
    n = problem.n
    h = max(settings.fd_step, 1e-7) * max(1.0, float(np.abs(pt.x).max()))
    H = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        try:
            gi = problem.eval_gradient(pt.x + e)
        except Exception:
            return np.eye(n)
        H[:, i] = (gi - pt.g) / h
    H = 0.5 * (H + H.T)
    if not np.all(np.isfinite(H)):
        return np.eye(n)
    w, V = np.linalg.eigh(H)
    floor = max(1e-6, 1e-8 * float(np.abs(w).max(initial=1.0)))
    w = np.maximum(w, floor)
    return (V * w) @ V.T


def _project_pd(H: np.ndarray) -> np.ndarray:
    """Eigenvalue-clipped symmetric part; rescues roundoff-degraded updates."""
    H = 0.5 * (H + H.T)
    w, V = np.linalg.eigh(H)
    floor = max(1e-8, 1e-10 * float(np.abs(w).max(initial=1.0)))
    return (V * np.maximum(w, floor)) @ V.T


def _restoration_direction(pt: _Point) -> np.ndarray:
    """Gauss-Newton step reducing constraint violation only."""
    viol_rows = pt.ci < 0.0
    A = np.vstack([pt.Je, pt.Ji[viol_rows]])
    b = np.concatenate([-pt.ce, -pt.ci[viol_rows]])
    if A.size == 0:
        return np.zeros_like(pt.x)
    if not (np.isfinite(A).all() and np.isfinite(b).all()):
        return np.zeros_like(pt.x)
    n = A.shape[1]
    AtA = A.T @ A + 1e-8 * np.eye(n)
    rhs = A.T @ b
    # far-off iterates can overflow the normal equations; fall back to a
    # least-squares step rather than propagate the LinAlgError
    if not np.isfinite(AtA).all():
        return np.linalg.lstsq(A, b, rcond=None)[0]
    try:
        return np.linalg.solve(AtA, rhs)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(A, b, rcond=None)[0]


def merit_line_search(model, pt: _Point, d, penalty, settings, grad_dot_d):
    """Backtracking Armijo search on the l1 exact-penalty merit.

    Returns (alpha, new_point) or (None, None) if no acceptable step
    at or above the minimum step length exists.
    """
    phi0 = pt.merit(penalty)
    descent = grad_dot_d - penalty * pt.l1_violation
    alpha = 1.0
    while alpha >= settings.min_step:
        try:
            cand = model.evaluate(pt.x + alpha * d)
        except NumericalBreakdownError:
            alpha *= settings.backtrack_ratio
            continue
        if cand.merit(penalty) <= phi0 + settings.armijo_c1 * alpha * min(descent, 0.0):
            return alpha, cand
        alpha *= settings.backtrack_ratio
    return None, None


def kkt_residual(pt: _Point, lam, mu) -> tuple[float, float]:
    """(stationarity inf-norm, complementarity inf-norm)."""
    stat = pt.g.copy()
    if len(lam):
        stat -= pt.Je.T @ lam
    if len(mu):
        stat -= pt.Ji.T @ mu
    comp = float(np.abs(mu * pt.ci).max(initial=0.0)) if len(mu) else 0.0
    return float(np.abs(stat).max(initial=0.0)), comp


def solve(problem: NlpProblem, x0, settings: SqpSettings | None = None) -> SqpResult:
    """Solve the NLP from x0; deterministic given identical inputs."""
    settings = settings or SqpSettings()
    model = _Model(problem, settings)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (problem.n,):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({problem.n},)")
    x_start = np.clip(x0, model.lo, model.hi)
    start_clamped = bool(np.any(x_start != x0))

    try:
        pt = model.evaluate(x_start)
    except NumericalBreakdownError:
        return SqpResult(x_start, np.nan, np.inf, np.inf, 0,
                         SolveStatus.NUMERICAL_BREAKDOWN, start_clamped)
    first = pt
    penalty = 1.0
    if settings.hessian_init == "fd":
        H = _fd_initial_hessian(problem, pt, settings)
    else:
        H = np.eye(problem.n)
    status = SolveStatus.MAX_ITERATIONS
    iterations = 0
    lam = np.zeros(len(pt.ce))
    mu = np.zeros(len(pt.ci))
    trace = []

    for it in range(1, settings.max_iterations + 1):
        iterations = it
        try:
            try:
                d, lam, mu = qp_step(H, pt.g, pt.Je, pt.ce, pt.Ji, pt.ci, None)
            except ValueError:
                # Cholesky of H failed: positive definiteness was lost to
                # roundoff despite damping; project and retry once
                H = _project_pd(H)
                d, lam, mu = qp_step(H, pt.g, pt.Je, pt.ce, pt.Ji, pt.ci, None)
            restorative = False
        except QpInfeasible:
            d = _restoration_direction(pt)
            lam = np.zeros(len(pt.ce))
            mu = np.zeros(len(pt.ci))
            restorative = True

        stat, comp = kkt_residual(pt, lam, mu)
        if (not restorative and stat <= settings.kkt_tolerance
                and comp <= settings.kkt_tolerance
                and pt.max_violation <= settings.constraint_tolerance):
            status = SolveStatus.CONVERGED
            break

        mult_norm = max(
            float(np.abs(lam).max(initial=0.0)), float(np.abs(mu).max(initial=0.0))
        )
        penalty = max(penalty, settings.penalty_growth * mult_norm)

        if restorative and pt.max_violation <= settings.constraint_tolerance:
            # feasible yet the QP linearization failed: give up cleanly
            status = SolveStatus.QP_INFEASIBLE
            break

        grad_dot_d = float(pt.g @ d) if not restorative else 0.0
        alpha, new_pt = merit_line_search(model, pt, d, penalty, settings, grad_dot_d)
        if alpha is None:
            status = SolveStatus.LINE_SEARCH_FAILURE
            break

        s = alpha * d
        grad_L_old = pt.g - pt.Je.T @ lam - pt.Ji.T @ mu
        grad_L_new = new_pt.g - new_pt.Je.T @ lam - new_pt.Ji.T @ mu
        y = grad_L_new - grad_L_old
        if it == 1 and settings.hessian_init == "identity":
            # capture the Lagrangian's curvature scale before updating
            sy = float(s @ y)
            if sy > 0.0:
                H = (float(y @ y) / sy) * np.eye(problem.n)
        H = damped_bfgs_update(H, s, y)
        pt = new_pt
        if settings.trace:
            trace.append({
                "iteration": it,
                "objective": pt.f,
                "violation": pt.max_violation,
                "step_length": alpha,
                "penalty": penalty,
            })

    # never return an iterate with worse l1 merit than the start
    if pt.merit(penalty) > first.merit(penalty):
        pt = first
        lam = np.zeros(len(pt.ce))
        mu = np.zeros(len(pt.ci))
    stat, comp = kkt_residual(pt, lam, mu)

    n_in = problem.ineq_count
    return SqpResult(
        x=pt.x,
        objective=pt.f,
        kkt_residual=max(stat, comp),
        constraint_violation=pt.max_violation,
        iterations=iterations,
        status=status,
        start_clamped=start_clamped,
        used_numeric_jacobian=model.used_numeric_jacobian,
        eq_multipliers=lam,
        ineq_multipliers=mu[:n_in],
        trace=trace,
    )

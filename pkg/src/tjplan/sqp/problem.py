"""Problem description and solver configuration types."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SolveStatus(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    LINE_SEARCH_FAILURE = "LineSearchFailure"
    QP_INFEASIBLE = "QpInfeasible"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"


@dataclass
class NlpProblem:
    """Dense NLP: min f(x) s.t. eq(x) = 0, ineq(x) >= 0, lower <= x <= upper.

    Callback output lengths are checked against the declared counts on
    every invocation.
    """

    n: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    eq_count: int = 0
    eq: Callable[[np.ndarray], np.ndarray] | None = None
    eq_jac: Callable[[np.ndarray], np.ndarray] | None = None
    ineq_count: int = 0
    ineq: Callable[[np.ndarray], np.ndarray] | None = None
    ineq_jac: Callable[[np.ndarray], np.ndarray] | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def eval_objective(self, x) -> float:
        v = float(self.objective(x))
        return v

    def eval_gradient(self, x) -> np.ndarray:
        g = np.asarray(self.gradient(x), dtype=np.float64)
        if g.shape != (self.n,):
            raise ValueError(f"gradient returned shape {g.shape}, expected ({self.n},)")
        return g

    def eval_eq(self, x) -> np.ndarray:
        if self.eq is None:
            return np.zeros(0)
        c = np.asarray(self.eq(x), dtype=np.float64)
        if c.shape != (self.eq_count,):
            raise ValueError(f"eq returned shape {c.shape}, expected ({self.eq_count},)")
        return c

    def eval_eq_jac(self, x) -> np.ndarray:
        if self.eq_jac is None:
            return np.zeros((0, self.n))
        J = np.asarray(self.eq_jac(x), dtype=np.float64)
        if J.shape != (self.eq_count, self.n):
            raise ValueError(f"eq_jac returned shape {J.shape}")
        return J

    def eval_ineq(self, x) -> np.ndarray:
        if self.ineq is None:
            return np.zeros(0)
        c = np.asarray(self.ineq(x), dtype=np.float64)
        if c.shape != (self.ineq_count,):
            raise ValueError(f"ineq returned shape {c.shape}, expected ({self.ineq_count},)")
        return c

    def eval_ineq_jac(self, x) -> np.ndarray:
        if self.ineq_jac is None:
            return np.zeros((0, self.n))
        J = np.asarray(self.ineq_jac(x), dtype=np.float64)
        if J.shape != (self.ineq_count, self.n):
            raise ValueError(f"ineq_jac returned shape {J.shape}")
        return J

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.full(self.n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=np.float64)
        hi = np.full(self.n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=np.float64)
        return lo, hi


@dataclass
class SqpSettings:
    max_iterations: int = 200
    kkt_tolerance: float = 1e-6
    constraint_tolerance: float = 1e-8
    penalty_growth: float = 10.0
    backtrack_ratio: float = 0.5
    min_step: float = 1e-12
    fd_step: float = 1e-7
    armijo_c1: float = 1e-4
    # "fd": objective curvature probed by gradient differences at x0
    # (exact for quadratics), projected positive definite; "identity": H0 = I.
    hessian_init: str = "fd"
    trace: bool = False

    def __post_init__(self):
        if self.kkt_tolerance <= 0 or self.constraint_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.backtrack_ratio < 1.0:
            raise ValueError("backtrack ratio must be in (0, 1)")


@dataclass
class SqpResult:
    x: np.ndarray
    objective: float
    kkt_residual: float
    constraint_violation: float
    iterations: int
    status: SolveStatus
    start_clamped: bool = False
    used_numeric_jacobian: bool = False
    eq_multipliers: np.ndarray | None = None
    ineq_multipliers: np.ndarray | None = None
    trace: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status is SolveStatus.CONVERGED

    def trace_csv(self) -> str:
        lines = ["iteration,objective,violation,step_length,penalty"]
        for row in self.trace:
            lines.append(
                f"{row['iteration']},{row['objective']:.17g},{row['violation']:.17g},"
                f"{row['step_length']:.17g},{row['penalty']:.17g}"
            )
        return "\n".join(lines) + "\n"

"""Dense nonlinear programming via sequential quadratic programming."""

from tjplan.sqp.bfgs import damped_bfgs_update
from tjplan.sqp.problem import NlpProblem, SolveStatus, SqpResult, SqpSettings
from tjplan.sqp.qp import QpInfeasible, solve_qp
from tjplan.sqp.solver import finite_diff_gradient, solve

__all__ = [
    "NlpProblem",
    "QpInfeasible",
    "SolveStatus",
    "SqpResult",
    "SqpSettings",
    "damped_bfgs_update",
    "finite_diff_gradient",
    "solve",
    "solve_qp",
]

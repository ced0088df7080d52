"""Assembling and solving the trajectory NLP."""

from tjplan.plan.coldstart import cold_start
from tjplan.plan.decision import DecisionVector, decode, encode
from tjplan.plan.nlp import build_nlp
from tjplan.plan.planner import PlanRequest, PlanResult, plan
from tjplan.plan.warmstart import (
    assemble_warm_start,
    predict_decision,
    warm_start_from_model,
)

__all__ = [
    "DecisionVector",
    "PlanRequest",
    "PlanResult",
    "assemble_warm_start",
    "build_nlp",
    "cold_start",
    "decode",
    "encode",
    "plan",
    "predict_decision",
    "warm_start_from_model",
]

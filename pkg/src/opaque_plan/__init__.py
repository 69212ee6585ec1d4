"""Secure optimal LTL planning under initial-state opacity."""

from importlib.resources import files

from .buchi import NBA, accepts_lasso, translate
from .ltl import Formula, LassoWord, ParseError, eval_lasso, parse
from .model import WTS, ModelError, Plan, load
from .oracle import SecurityVerdict, brute_force_plan, is_secure, satisfies
from .planner import Infeasible, PlanResult, plan

FACTORY = files(__package__) / "data" / "factory.json"

__all__ = [
    "FACTORY",
    "NBA",
    "WTS",
    "Formula",
    "Infeasible",
    "LassoWord",
    "ModelError",
    "ParseError",
    "Plan",
    "PlanResult",
    "SecurityVerdict",
    "accepts_lasso",
    "brute_force_plan",
    "eval_lasso",
    "is_secure",
    "load",
    "parse",
    "plan",
    "satisfies",
    "translate",
]

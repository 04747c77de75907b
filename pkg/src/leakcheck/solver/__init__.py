"""Satisfiability of leak-free constraint systems over lifted booleans."""

from .kernel import KERNEL
from .search import DEFAULT_BUDGET, BudgetExceeded, SolveResult, enumerate_models, minimize_conflict, solve
from .smtlib import emit_smtlib2

__all__ = [
    "DEFAULT_BUDGET",
    "KERNEL",
    "BudgetExceeded",
    "SolveResult",
    "emit_smtlib2",
    "enumerate_models",
    "minimize_conflict",
    "solve",
]

"""Nonlinear programming backend: interior-point solver and KKT linear algebra."""
from .ipm import STATUSES, IterationRecord, SolveReport, SolverOptions, solve
from .ldl import COMPILED
from .problem import DenseNlp

__all__ = ["COMPILED", "DenseNlp", "IterationRecord", "STATUSES", "SolveReport", "SolverOptions",
           "solve"]

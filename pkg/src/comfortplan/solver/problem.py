"""Small NLPs defined by dense callables (tests and auxiliary problems)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp


@dataclass
class DenseNlp:
    """Adapter exposing the solver's evaluator protocol from plain callables.

    ``hess(x, obj_factor, lagrange)`` returns the full dense Lagrangian
    Hessian; the adapter hands the solver its lower triangle.
    """

    f: Callable
    grad: Callable
    hess: Callable
    x_lower: np.ndarray
    x_upper: np.ndarray
    g: Callable | None = None
    jac: Callable | None = None
    g_lower: np.ndarray = field(default_factory=lambda: np.zeros(0))
    g_upper: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.x_lower = np.asarray(self.x_lower, dtype=float)
        self.x_upper = np.asarray(self.x_upper, dtype=float)
        self.g_lower = np.asarray(self.g_lower, dtype=float)
        self.g_upper = np.asarray(self.g_upper, dtype=float)

    @property
    def n(self) -> int:
        return len(self.x_lower)

    @property
    def m(self) -> int:
        return len(self.g_lower)

    def objective(self, x):
        return float(self.f(x))

    def gradient(self, x):
        return np.asarray(self.grad(x), dtype=float)

    def constraints(self, x):
        return np.asarray(self.g(x), dtype=float) if self.g else np.zeros(0)

    def jacobian(self, x):
        if not self.jac:
            return sp.csr_matrix((0, self.n))
        return sp.csr_matrix(np.atleast_2d(self.jac(x)).reshape(self.m, self.n))

    def hessian(self, x, obj_factor, lagrange):
        return sp.csr_matrix(np.tril(np.atleast_2d(self.hess(x, obj_factor, lagrange))))

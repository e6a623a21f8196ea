"""Sparse symmetric indefinite LDL^T with a fixed (static) ordering.

The compiled kernels are used when the extension module is built; otherwise
the pure-Python kernels with identical semantics are loaded.  ``COMPILED``
reports which one was selected at import.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

try:
    from . import _ldl as _kernels

    COMPILED = True
except ImportError:  # extension not built
    from . import _ldl_py as _kernels

    COMPILED = False


class ZeroPivot(ArithmeticError):
    """A pivot vanished; the matrix is singular in the chosen ordering."""

    def __init__(self, column: int):
        super().__init__(f"zero pivot at column {column}")
        self.column = column


@dataclass
class LDLFactor:
    n: int
    perm: np.ndarray
    Lp: np.ndarray
    Li: np.ndarray
    Lx: np.ndarray
    D: np.ndarray
    kernels: object = _kernels

    @property
    def inertia(self) -> tuple[int, int, int]:
        pos = int(np.sum(self.D > 0))
        neg = int(np.sum(self.D < 0))
        return pos, neg, self.n - pos - neg

    @property
    def nnz(self) -> int:
        return int(self.Lp[-1])

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(np.asarray(b, dtype=float)[self.perm])
        self.kernels.solve(self.n, self.Lp, self.Li, self.Lx, self.D, x)
        out = np.empty_like(x)
        out[self.perm] = x
        return out


def ldl_factor(A, perm=None, pivot_tol: float = 0.0, kernels=None) -> LDLFactor:
    """Factor the symmetric sparse matrix ``A`` (full or lower storage is fine).

    Only the entries of ``A`` on or below the diagonal are read.  ``perm``
    is a symmetric ordering (``perm[k]`` is the original index of pivot k).
    Raises :class:`ZeroPivot` when a pivot magnitude is ``<= pivot_tol``.
    """
    kernels = kernels or _kernels
    A = sp.coo_matrix(A)
    n = A.shape[0]
    perm = np.arange(n) if perm is None else np.asarray(perm, dtype=np.int64)
    inv = np.empty(n, dtype=np.int64)
    inv[perm] = np.arange(n)
    keep = A.row >= A.col
    r, c = inv[A.row[keep]], inv[A.col[keep]]
    # upper triangle of the permuted matrix, column-wise
    U = sp.csc_matrix((A.data[keep], (np.minimum(r, c), np.maximum(r, c))), shape=(n, n))
    U.sum_duplicates()
    Ap = U.indptr.astype(np.int64)
    Ai = U.indices.astype(np.int64)
    Ax = U.data.astype(float)
    parent, Lp = kernels.symbolic(n, Ap, Ai)
    Li, Lx, D, status = kernels.numeric(n, Ap, Ai, Ax, parent, Lp, float(pivot_tol))
    if status < n:
        raise ZeroPivot(int(perm[status]))
    return LDLFactor(n, perm, Lp, Li, Lx, D, kernels)

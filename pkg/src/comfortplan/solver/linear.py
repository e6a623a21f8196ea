"""Factorization of the condensed primal-dual KKT matrix with inertia.

The matrix is ``[[H, J^T], [J, -delta_c I]]`` where ``H`` already contains
the barrier and regularization terms and ``J`` holds the equality rows.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack

from .ldl import COMPILED, ZeroPivot, ldl_factor

DENSE_LIMIT = 300


class SingularKkt(ArithmeticError):
    pass


def _dense_inertia(ldu, ipiv):
    """Inertia of the block diagonal factor returned by ``dsytrf`` (lower)."""
    n = ldu.shape[0]
    pos = neg = zero = 0
    k = 0
    while k < n:
        if ipiv[k] > 0:
            d = ldu[k, k]
            pos += d > 0
            neg += d < 0
            zero += d == 0
            k += 1
        else:
            a, b, c = ldu[k, k], ldu[k + 1, k], ldu[k + 1, k + 1]
            det = a * c - b * b
            if det < 0:
                pos += 1
                neg += 1
            elif det > 0:
                if a + c > 0:
                    pos += 2
                else:
                    neg += 2
            else:
                zero += 1
                pos += (a + c) > 0
                neg += (a + c) < 0
            k += 2
    return int(pos), int(neg), int(zero)


class DenseKkt:
    """LAPACK Bunch-Kaufman factorization."""

    kind = "dense"

    def __init__(self, K: np.ndarray):
        K = K.toarray() if sp.issparse(K) else np.asarray(K)
        ldu, ipiv, info = lapack.dsytrf(K, lower=1)
        if info < 0:
            raise ValueError("dsytrf argument error")
        self.ldu, self.ipiv = ldu, ipiv
        pos, neg, zero = _dense_inertia(ldu, ipiv)
        # only exact zeros count; small pivots are judged by the solve residual
        self.inertia = (pos, neg, zero if info == 0 else max(zero, 1))
        self.K = K

    def solve(self, b):
        x, info = lapack.dsytrs(self.ldu, self.ipiv, b, lower=1)
        return x

    def residual(self, x, b):
        return b - self.K @ x


class SparseKkt:
    """Static-ordering sparse LDL^T."""

    kind = "sparse"

    def __init__(self, K: sp.spmatrix, perm: np.ndarray, pivot_tol: float):
        self.K = sp.csr_matrix(K)
        try:
            self.factor = ldl_factor(self.K, perm, pivot_tol)
        except ZeroPivot:
            self.inertia = (0, 0, 1)
            self.factor = None
            return
        self.inertia = self.factor.inertia

    def solve(self, b):
        return self.factor.solve(b)

    def residual(self, x, b):
        return b - self.K @ x


def kkt_matrix(H: sp.spmatrix, J: sp.spmatrix, delta_c: float) -> sp.csr_matrix:
    m = J.shape[0]
    reg = sp.diags(np.full(m, -delta_c)) if m else None
    return sp.bmat([[H, J.T], [J, reg]], format="csr")


def factorize(H, J, delta_c, perm=None, pivot_tol=1e-20, sparse=None):
    """Factor the KKT matrix; ``sparse=None`` picks by size and availability."""
    K = kkt_matrix(sp.csr_matrix(H), sp.csr_matrix(J), delta_c)
    size = K.shape[0]
    if sparse is None:
        sparse = COMPILED and size >= DENSE_LIMIT
    if sparse:
        if perm is None:
            perm = np.arange(size)
        # absolute threshold: barrier terms make the largest entry meaningless as a
        # scale, and inaccurate factors are caught by the solve residual
        return SparseKkt(K, perm, pivot_tol)
    return DenseKkt(K)


def solve_refined(fac, b, max_steps: int = 5, rtol: float = 1e-11):
    """Solve with iterative refinement; returns ``(x, relative residual)``."""
    x = fac.solve(b)
    bnorm = max(np.linalg.norm(b, np.inf), 1e-300)
    res = fac.residual(x, b)
    rel = np.linalg.norm(res, np.inf) / bnorm
    for _ in range(max_steps):
        if rel <= rtol or not np.isfinite(rel):
            break
        x_new = x + fac.solve(res)
        res_new = fac.residual(x_new, b)
        rel_new = np.linalg.norm(res_new, np.inf) / bnorm
        if not rel_new < rel:
            break
        x, res, rel = x_new, res_new, rel_new
    return x, rel

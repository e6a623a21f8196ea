# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled up-looking sparse LDL^T kernels (no pivoting).

The input is the upper triangle of a symmetric matrix in CSC form.  See
``_ldl_py`` for the reference implementation with identical semantics.
"""
import numpy as np
cimport numpy as cnp

ctypedef cnp.int64_t idx_t


def symbolic(idx_t n, const idx_t[::1] Ap, const idx_t[::1] Ai):
    """Elimination tree and column counts of L; returns ``(parent, Lp)``."""
    cdef idx_t[::1] parent = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] flag = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] lnz = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] Lp = np.empty(n + 1, dtype=np.int64)
    cdef idx_t k, p, i
    for k in range(n):
        parent[k] = -1
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i < k:
                while flag[i] != k:
                    if parent[i] == -1:
                        parent[i] = k
                    lnz[i] += 1
                    flag[i] = k
                    i = parent[i]
    Lp[0] = 0
    for k in range(n):
        Lp[k + 1] = Lp[k] + lnz[k]
    return np.asarray(parent), np.asarray(Lp)


def numeric(idx_t n, const idx_t[::1] Ap, const idx_t[::1] Ai, const double[::1] Ax,
            const idx_t[::1] parent, const idx_t[::1] Lp, double pivot_tol):
    """Numeric factorization; returns ``(Li, Lx, D, status)``.

    ``status`` is ``n`` on success or the first column whose pivot magnitude
    falls to ``pivot_tol`` or below.
    """
    cdef idx_t nnz = Lp[n]
    cdef idx_t[::1] Li = np.empty(nnz, dtype=np.int64)
    cdef double[::1] Lx = np.empty(nnz, dtype=np.float64)
    cdef double[::1] D = np.empty(n, dtype=np.float64)
    cdef double[::1] Y = np.zeros(n, dtype=np.float64)
    cdef idx_t[::1] pattern = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] flag = np.empty(n, dtype=np.int64)
    cdef idx_t[::1] lnz = np.zeros(n, dtype=np.int64)
    cdef idx_t k, p, i, top, length, p2
    cdef double yi, lki
    for k in range(n):
        Y[k] = 0.0
        top = n
        flag[k] = k
        for p in range(Ap[k], Ap[k + 1]):
            i = Ai[p]
            if i <= k:
                Y[i] += Ax[p]
                length = 0
                while flag[i] != k:
                    pattern[length] = i
                    length += 1
                    flag[i] = k
                    i = parent[i]
                while length > 0:
                    top -= 1
                    length -= 1
                    pattern[top] = pattern[length]
        D[k] = Y[k]
        Y[k] = 0.0
        while top < n:
            i = pattern[top]
            yi = Y[i]
            Y[i] = 0.0
            p2 = Lp[i] + lnz[i]
            for p in range(Lp[i], p2):
                Y[Li[p]] -= Lx[p] * yi
            lki = yi / D[i]
            D[k] -= lki * yi
            Li[p2] = k
            Lx[p2] = lki
            lnz[i] += 1
            top += 1
        if D[k] <= pivot_tol and D[k] >= -pivot_tol:
            return np.asarray(Li), np.asarray(Lx), np.asarray(D), k
    return np.asarray(Li), np.asarray(Lx), np.asarray(D), n


def solve(idx_t n, const idx_t[::1] Lp, const idx_t[::1] Li, const double[::1] Lx,
          const double[::1] D, double[::1] x):
    """Overwrite ``x`` with the solution of ``L D L^T x = b``."""
    cdef idx_t j, p
    for j in range(n):
        for p in range(Lp[j], Lp[j + 1]):
            x[Li[p]] -= Lx[p] * x[j]
    for j in range(n):
        x[j] /= D[j]
    for j in range(n - 1, -1, -1):
        for p in range(Lp[j], Lp[j + 1]):
            x[j] -= Lx[p] * x[Li[p]]

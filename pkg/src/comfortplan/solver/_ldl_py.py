"""Pure-Python sparse LDL^T kernels, the fallback for the compiled module.

Same algorithm and return values as the compiled ``_ldl`` extension: an
up-looking factorization driven by the elimination tree, without pivoting.
"""
from __future__ import annotations

import numpy as np


def symbolic(n, Ap, Ai):
    parent = [-1] * n
    flag = [0] * n
    lnz = [0] * n
    Ap, Ai = Ap.tolist(), Ai.tolist()
    for k in range(n):
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
    Lp = np.zeros(n + 1, dtype=np.int64)
    Lp[1:] = np.cumsum(lnz)
    return np.array(parent, dtype=np.int64), Lp


def numeric(n, Ap, Ai, Ax, parent, Lp, pivot_tol):
    nnz = int(Lp[n])
    Li = [0] * nnz
    Lx = [0.0] * nnz
    D = [0.0] * n
    Y = [0.0] * n
    pattern = [0] * n
    flag = [0] * n
    lnz = [0] * n
    Ap, Ai, Ax, parent, Lp = Ap.tolist(), Ai.tolist(), Ax.tolist(), parent.tolist(), Lp.tolist()
    status = n
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
        dk = Y[k]
        Y[k] = 0.0
        while top < n:
            i = pattern[top]
            yi = Y[i]
            Y[i] = 0.0
            p2 = Lp[i] + lnz[i]
            for p in range(Lp[i], p2):
                Y[Li[p]] -= Lx[p] * yi
            lki = yi / D[i]
            dk -= lki * yi
            Li[p2] = k
            Lx[p2] = lki
            lnz[i] += 1
            top += 1
        D[k] = dk
        if -pivot_tol <= dk <= pivot_tol:
            status = k
            break
    return (np.array(Li, dtype=np.int64), np.array(Lx), np.array(D), status)


def solve(n, Lp, Li, Lx, D, x):
    Lp, Li, Lx, D = Lp.tolist(), Li.tolist(), Lx.tolist(), D.tolist()
    b = x.tolist()
    for j in range(n):
        bj = b[j]
        for p in range(Lp[j], Lp[j + 1]):
            b[Li[p]] -= Lx[p] * bj
    for j in range(n):
        b[j] /= D[j]
    for j in range(n - 1, -1, -1):
        s = b[j]
        for p in range(Lp[j], Lp[j + 1]):
            s -= Lx[p] * b[Li[p]]
        b[j] = s
    x[:] = b

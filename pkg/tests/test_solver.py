import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from comfortplan.solver import COMPILED, DenseNlp, SolverOptions, solve
from comfortplan.solver import _ldl_py
from comfortplan.solver.ldl import ZeroPivot, ldl_factor
from comfortplan.solver.linear import DenseKkt, factorize, kkt_matrix, solve_refined

INF = np.inf


def rosenbrock():
    f = lambda x: (1 - x[0]) ** 2 + 100 * (x[1] - x[0] ** 2) ** 2
    g = lambda x: np.array([-2 * (1 - x[0]) - 400 * x[0] * (x[1] - x[0] ** 2),
                            200 * (x[1] - x[0] ** 2)])
    h = lambda x, s, y: s * np.array([[2 - 400 * x[1] + 1200 * x[0] ** 2, -400 * x[0]],
                                      [-400 * x[0], 200.0]])
    return DenseNlp(f, g, h, [-INF, -INF], [INF, INF])


def hs071():
    f = lambda x: x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]
    grad = lambda x: np.array([x[3] * (2 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1,
                               x[0] * (x[0] + x[1] + x[2])])
    g = lambda x: np.array([np.prod(x), x @ x])
    jac = lambda x: np.array([[np.prod(x) / x[i] for i in range(4)], 2 * x])

    def hess(x, s, y):
        H = s * np.array([[2 * x[3], x[3], x[3], 2 * x[0] + x[1] + x[2]],
                          [x[3], 0, 0, x[0]], [x[3], 0, 0, x[0]],
                          [2 * x[0] + x[1] + x[2], x[0], x[0], 0]])
        P = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                if i != j:
                    P[i, j] = np.prod([x[k] for k in range(4) if k not in (i, j)])
        return H + y[0] * P + y[1] * 2 * np.eye(4)

    return DenseNlp(f, grad, hess, np.ones(4), 5 * np.ones(4), g, jac, [25.0, 40.0], [INF, 40.0])


def test_unconstrained_rosenbrock():
    rep = solve(rosenbrock(), np.array([-1.2, 1.0]))
    assert rep.converged
    assert rep.x == pytest.approx([1.0, 1.0], abs=1e-6)


@pytest.mark.parametrize("globalization", ["filter", "merit"])
def test_hs071(globalization):
    rep = solve(hs071(), np.array([1.0, 5.0, 5.0, 1.0]), SolverOptions(globalization=globalization))
    assert rep.converged
    assert rep.objective == pytest.approx(17.0140173, rel=1e-7)
    assert rep.x == pytest.approx([1.0, 4.74299963, 3.82114998, 1.37940829], abs=1e-6)
    assert rep.max_violation < 1e-8


def test_merit_globalization_is_monotone():
    rep = solve(hs071(), np.array([1.0, 5.0, 5.0, 1.0]), SolverOptions(globalization="merit"))
    for rec in rep.history:
        if math.isfinite(rec.merit_before) and rec.alpha > 0:
            assert rec.merit_after <= rec.merit_before + 1e-12 * max(1.0, abs(rec.merit_before))
        assert rec.step_kind == "merit"


def test_filter_records_step_kinds():
    rep = solve(hs071(), np.array([1.0, 5.0, 5.0, 1.0]))
    assert {r.step_kind for r in rep.history} <= {"f", "h", "merit"}


def test_infeasible_problem_is_reported():
    nlp = DenseNlp(lambda x: x @ x, lambda x: 2 * x, lambda x, s, y: 2 * s * np.eye(2) + 2 * y[0] * np.eye(2),
                   [-INF, -INF], [INF, INF], lambda x: np.array([x @ x]),
                   lambda x: 2 * x[None, :], [-INF], [-1.0])
    rep = solve(nlp, np.array([0.5, 0.5]), SolverOptions(max_iterations=100))
    assert not rep.converged
    assert rep.status in ("infeasible", "iteration_limit", "numerical_failure")


def test_iteration_limit():
    rep = solve(rosenbrock(), np.array([-1.2, 1.0]), SolverOptions(max_iterations=3))
    assert rep.status == "iteration_limit" and rep.iterations == 3


def test_log_callback_and_json_lines():
    seen = []
    rep = solve(hs071(), np.array([1.0, 5.0, 5.0, 1.0]), SolverOptions(log=seen.append))
    assert len(seen) == len(rep.history) > 0
    import json

    assert json.loads(seen[0].line())["iteration"] == seen[0].iteration


def test_option_validation():
    with pytest.raises(ValueError):
        SolverOptions(globalization="trust")
    with pytest.raises(ValueError):
        SolverOptions(linear_solver="magic")
    with pytest.raises(ValueError):
        SolverOptions(max_iterations=0)


# ------------------------------------------------------------ linear algebra
def _quasidefinite(rng, n, m, density=0.3):
    A = sp.random(n, n, density, random_state=rng)
    H = (A @ A.T + sp.eye(n)).tocsr()
    J = sp.random(m, n, density, random_state=rng).tocsr() + sp.eye(m, n)
    return kkt_matrix(H, J, 1e-3), n, m


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 25), st.integers(0, 10), st.integers(0, 2**31 - 1))
def test_sparse_inertia_matches_eigenvalues(n, m, seed):
    m = min(m, n)
    K, n, m = _quasidefinite(np.random.default_rng(seed), n, m)
    rng = np.random.default_rng(seed + 1)
    perm = rng.permutation(n + m)
    f = ldl_factor(K, perm, kernels=_ldl_py)
    ev = np.linalg.eigvalsh(K.toarray())
    assert f.inertia == (int(np.sum(ev > 0)), int(np.sum(ev < 0)), 0)
    b = rng.standard_normal(n + m)
    assert np.allclose(K @ f.solve(b), b, atol=1e-8)


@pytest.mark.skipif(not COMPILED, reason="compiled kernels not built")
def test_compiled_and_python_kernels_agree():
    K, n, m = _quasidefinite(np.random.default_rng(7), 60, 20, 0.1)
    perm = np.random.default_rng(8).permutation(n + m)
    a = ldl_factor(K, perm)
    b = ldl_factor(K, perm, kernels=_ldl_py)
    assert np.array_equal(a.Lp, b.Lp) and np.array_equal(a.Li, b.Li)
    assert np.allclose(a.Lx, b.Lx, rtol=1e-12) and np.allclose(a.D, b.D, rtol=1e-12)


def test_zero_pivot_is_raised():
    K = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(ZeroPivot):
        ldl_factor(K, np.arange(2), 1e-20)
    # the pivoted dense path handles the same matrix
    d = DenseKkt(K)
    assert d.inertia == (1, 1, 0)


def test_factorize_dense_and_sparse_agree():
    rng = np.random.default_rng(2)
    K, n, m = _quasidefinite(rng, 40, 12)
    H, J = K[:n, :n], K[n:, :n]
    b = rng.standard_normal(n + m)
    xd, _ = solve_refined(factorize(H, J, 1e-3, sparse=False), b)
    xs, rel = solve_refined(factorize(H, J, 1e-3, sparse=True), b)
    assert rel < 1e-10
    assert np.allclose(xd, xs, atol=1e-9)

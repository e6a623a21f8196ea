"""Compiled versus pure-Python sparse LDL^T on KKT matrices from the planner.

Usage::

    python3 benchmarks/bench_ldl.py [--repeat 5]

The matrices are the condensed KKT systems at the seed of the s-shape problem
(with and without obstacles), ordered the way the solver orders them.
"""
from __future__ import annotations

import argparse
import time

import numpy as np
import scipy.sparse as sp

from comfortplan import BoundaryState, PlanningProblem
from comfortplan.assembly import assemble
from comfortplan.initial_guess import path_guess_all, speed_guess
from comfortplan.obstacles import Ellipse, make_obstacle
from comfortplan.solver import _ldl_py
from comfortplan.solver.ipm import _Problem
from comfortplan.solver.ldl import COMPILED, ldl_factor
from comfortplan.solver.linear import kkt_matrix


def kkt_at_seed(problem: PlanningProblem):
    nlp = assemble(problem)
    g = path_guess_all(problem, ["base_B"])[0]
    x = nlp.initial_point(g.theta, speed_guess(problem, g).speed, g.lam)
    P = _Problem(nlp)
    H = P.hess(x, np.zeros(P.m)) + sp.eye(P.n) * 1e-2
    JE = P.jac(x)[P.E]
    return kkt_matrix(H, JE, 1e-8), P.ordering()


def best_time(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    start = BoundaryState((0.0, 0.0), 0.0)
    end = BoundaryState((-1.0, -4.0), 0.0)
    cases = {
        "s_shape": PlanningProblem(start, end),
        "s_shape_obstacles": PlanningProblem(
            start, end, obstacles=[make_obstacle(Ellipse(0.5, 0.25), (-0.3, 1.4)),
                                   make_obstacle(Ellipse(0.5, 0.25), (-0.6, -5.4))]),
    }
    if not COMPILED:
        print("compiled kernels are not built; only the Python timing is shown")
    print(f"{'case':<20}{'size':>6}{'nnz(L)':>9}{'python [ms]':>14}{'compiled [ms]':>15}{'speedup':>9}")
    for name, problem in cases.items():
        K, perm = kkt_at_seed(problem)
        f_py = ldl_factor(K, perm, kernels=_ldl_py)
        t_py = best_time(lambda: ldl_factor(K, perm, kernels=_ldl_py), args.repeat)
        row = f"{name:<20}{K.shape[0]:>6}{f_py.nnz:>9}{1e3 * t_py:>14.2f}"
        if COMPILED:
            f_c = ldl_factor(K, perm)
            b = np.random.default_rng(0).standard_normal(K.shape[0])
            assert np.allclose(f_c.solve(b), f_py.solve(b), rtol=1e-8, atol=1e-10)
            t_c = best_time(lambda: ldl_factor(K, perm), args.repeat)
            row += f"{1e3 * t_c:>15.2f}{t_py / t_c:>9.1f}"
        print(row)


if __name__ == "__main__":
    main()

"""Finite-dimensional nonlinear program for the discomfort minimization.

The program works on the *free* unknowns of a :class:`~comfortplan.fem.DofLayout`
(fixed boundary values are substituted).  Constraints follow the
``g_lower <= g(x) <= g_upper`` convention; equality rows have equal bounds.
Derivatives are analytic: pointwise kernels in the variables
``(v, v', v'', theta', theta'', lam)`` are mapped to element unknowns through
constant per-point basis matrices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .core import (
    DDTH, DDV, DTH, DV, LAM, V, NonFiniteIntegrand, PlanningProblem, integrand_derivatives,
    integrand_values,
)
from .fem import (
    GAUSS12, DofLayout, FieldCoefficients, dof_layout, element_quadrature, hermite_basis,
    speed_basis_table,
)
from .obstacles import clearance_derivatives, make_obstacle
from .weights import EffectiveWeights, characteristic_scales, problem_weights

INF = np.inf


@dataclass
class TrajectoryVars:
    """Unknowns in structured form: fields, path length and auxiliary positions."""

    theta: FieldCoefficients
    speed: FieldCoefficients
    lam: float
    positions: np.ndarray


@dataclass
class ConstraintBlock:
    kind: str
    rows: slice
    points: np.ndarray
    obstacle: int | None = None


class _Pattern:
    """Fixed sparse pattern assembled from repeated ``(row, col)`` triplets."""

    def __init__(self, rows, cols, shape):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        self.keep = (rows >= 0) & (cols >= 0)
        key = rows[self.keep] * shape[1] + cols[self.keep]
        uniq, self.inverse = np.unique(key, return_inverse=True)
        self.rows = uniq // shape[1]
        self.cols = uniq % shape[1]
        self.shape = shape

    @property
    def nnz(self) -> int:
        return len(self.rows)

    def data(self, values) -> np.ndarray:
        v = np.asarray(values, dtype=float).ravel()[self.keep]
        return np.bincount(self.inverse, weights=v, minlength=self.nnz)

    def matrix(self, values) -> sp.csr_matrix:
        return sp.csr_matrix((self.data(values), (self.rows, self.cols)), shape=self.shape)


def _lower_pairs(idx):
    """Row/col triplets of the lower triangle of dense local blocks ``(G, k, k)``."""
    k = idx.shape[-1]
    r = np.broadcast_to(idx[..., :, None], idx.shape[:-1] + (k, k))
    c = np.broadcast_to(idx[..., None, :], idx.shape[:-1] + (k, k))
    valid = (r >= 0) & (c >= 0)
    rr = np.where(r >= c, r, c)
    cc = np.where(r >= c, c, r)
    # keep each unordered pair once: the block is symmetric, take a >= b local slots
    tri = np.tril(np.ones((k, k), dtype=bool))
    mask = valid & tri
    rr = np.where(mask, rr, -1)
    cc = np.where(mask, cc, -1)
    return rr, cc


def _tril_weights(k):
    """Weights turning a symmetric local block into its lower-triangle contribution.

    Off-diagonal local pairs (a, b) with a > b are kept once; when two local
    slots map to the same global index the diagonal picks up both halves
    because the pattern sums duplicates.
    """
    return np.tril(np.ones((k, k)))


def _element_basis_matrices(n, xi, singular_left, singular_right):
    """``(n, q, 6, 9)`` maps from element unknowns to pointwise variables."""
    h = 1.0 / n
    sv = speed_basis_table(n, xi, singular_left, singular_right)
    st = hermite_basis(xi, h)
    B = np.zeros(xi.shape + (6, 9))
    B[..., V, 4:8] = sv[..., 0]
    B[..., DV, 4:8] = sv[..., 1]
    B[..., DDV, 4:8] = sv[..., 2]
    B[..., DTH, 0:4] = st[..., 1]
    B[..., DDTH, 0:4] = st[..., 2]
    B[..., LAM, 8] = 1.0
    return B


def _congruence(B, H, w=None):
    """``sum_p w_p B_p^T H_p B_p`` per element for ``B (e, p, k, m)``, ``H (e, p, k, k)``."""
    T = H @ B
    if w is not None:
        T = T * w[..., None, None]
    e, p, k, m = B.shape
    return np.swapaxes(B.reshape(e, p * k, m), 1, 2) @ T.reshape(e, p * k, m)


def _pull_back(B, g, w=None):
    """``sum_p w_p B_p^T g_p`` per element for ``g (e, p, k)``."""
    if w is not None:
        g = g * w[..., None]
    e, p, k, m = B.shape
    return (g.reshape(e, 1, p * k) @ B.reshape(e, p * k, m))[:, 0]


def _dynamic_gradient(v, dv, dth, il):
    g = np.zeros(v.shape + (5, 6))
    g[..., 0, V] = 1.0
    # a_T = v v' / lam
    g[..., 1, V] = dv * il
    g[..., 1, DV] = v * il
    g[..., 1, LAM] = -v * dv * il**2
    # a_N = v^2 theta' / lam
    g[..., 2, V] = 2 * v * dth * il
    g[..., 2, DTH] = v * v * il
    g[..., 2, LAM] = -v * v * dth * il**2
    # omega = theta' v / lam
    g[..., 3, V] = dth * il
    g[..., 3, DTH] = v * il
    g[..., 3, LAM] = -v * dth * il**2
    # kappa = theta' / lam
    g[..., 4, DTH] = il
    g[..., 4, LAM] = -dth * il**2
    return g


def _dynamic_hessian(v, dv, dth, il):
    H = np.zeros(v.shape + (5, 6, 6))
    il2, il3 = il**2, il**3
    H[..., 1, V, DV] = il
    H[..., 1, V, LAM] = -dv * il2
    H[..., 1, DV, LAM] = -v * il2
    H[..., 1, LAM, LAM] = 2 * v * dv * il3
    H[..., 2, V, V] = 2 * dth * il
    H[..., 2, V, DTH] = 2 * v * il
    H[..., 2, V, LAM] = -2 * v * dth * il2
    H[..., 2, DTH, LAM] = -v * v * il2
    H[..., 2, LAM, LAM] = 2 * v * v * dth * il3
    H[..., 3, V, DTH] = il
    H[..., 3, V, LAM] = -dth * il2
    H[..., 3, DTH, LAM] = -v * il2
    H[..., 3, LAM, LAM] = 2 * v * dth * il3
    H[..., 4, DTH, LAM] = -il2
    H[..., 4, LAM, LAM] = 2 * dth * il3
    # mirror the upper entries written above
    for i, j in ((V, DV), (V, LAM), (DV, LAM), (V, DTH), (DTH, LAM)):
        H[..., j, i] = H[..., i, j]
    return H


def _dynamic_quantities(p, order: int = 2):
    """v, a_T, a_N, omega, kappa with gradients/Hessians in pointwise variables.

    Returns value ``(..., 5)``, grad ``(..., 5, 6)`` and hess ``(..., 5, 6, 6)``,
    truncated after ``order`` derivatives.
    """
    v, dv, dth, lam = p[..., V], p[..., DV], p[..., DTH], p[..., LAM]
    il = 1.0 / lam
    val = np.stack([v, v * dv * il, v * v * dth * il, dth * v * il, dth * il], -1)
    out = [val]
    if order >= 1:
        out.append(_dynamic_gradient(v, dv, dth, il))
    if order >= 2:
        out.append(_dynamic_hessian(v, dv, dth, il))
    return tuple(out)


class DiscomfortNlp:
    """Assembled program with evaluators over the free unknowns.

    Evaluators: :meth:`objective`, :meth:`gradient`, :meth:`constraints`,
    :meth:`jacobian` (CSR with a fixed pattern) and :meth:`hessian` (lower
    triangle of the Lagrangian Hessian, CSR with a fixed pattern).
    """

    def __init__(self, problem: PlanningProblem, weights: EffectiveWeights | None = None):
        self.problem = problem
        self.weights = weights or problem_weights(problem)
        self.obstacles = [o if hasattr(o, "radial") else make_obstacle(*o) for o in problem.obstacles]
        lay = dof_layout(problem.n, problem.M, bool(self.obstacles), (problem.start, problem.end))
        self.layout: DofLayout = lay
        self.L_star = characteristic_scales(
            problem.chord_length, problem.min_turn_radius, problem.bounds.speed_max
        ).L_star
        self.n = lay.n_free
        self._f2f = lay.full_to_free()
        n = lay.n
        self._elem_idx = np.concatenate(
            [lay.theta_element_index(), lay.speed_element_index(),
             np.full((n, 1), lay.lam_index)], axis=1)

        xi, w = element_quadrature(n, lay.singular_left, lay.singular_right)
        self._obj_B = _element_basis_matrices(n, xi, lay.singular_left, lay.singular_right)
        self._obj_w = w

        self.blocks: list[ConstraintBlock] = []
        lower, upper = [], []
        jac_r, jac_c = [], []
        self._evals = []
        self._value_evals = []
        row = 0

        def add(kind, nrows, lo, hi, points, jidx, evaluator, obstacle=None, values=None):
            nonlocal row
            self.blocks.append(ConstraintBlock(kind, slice(row, row + nrows), points, obstacle))
            lower.append(np.broadcast_to(lo, (nrows,)).astype(float))
            upper.append(np.broadcast_to(hi, (nrows,)).astype(float))
            rows = np.broadcast_to(np.arange(row, row + nrows)[:, None], jidx.shape)
            jac_r.append(rows.ravel())
            jac_c.append(self._f2f[jidx].ravel())
            self._evals.append(evaluator)
            self._value_evals.append(values or (lambda z, ev=evaluator: ev(z)[0]))
            row += nrows

        self._setup_chain(add)
        self._setup_couplings(add)
        if problem.impose_bounds:
            self._setup_dynamic(add)
        self._setup_obstacles(add)

        self.m = row
        self.g_lower = np.concatenate(lower) if lower else np.zeros(0)
        self.g_upper = np.concatenate(upper) if upper else np.zeros(0)
        self._jac = _Pattern(np.concatenate(jac_r), np.concatenate(jac_c), (self.m, self.n))
        self._setup_hessian_pattern()
        self._setup_bounds()
        self._cache_key = None
        self.x0 = None

    # ------------------------------------------------------------------ setup
    def _setup_chain(self, add):
        lay = self.layout
        n = lay.n
        u = lay.point_u
        ua, ub = u[:-1], u[1:]
        e = np.minimum((ua * n + 1e-12).astype(int), n - 1)
        xa, xb = ua * n - e, ub * n - e
        s = GAUSS12.points
        xi = xa[:, None] + (xb - xa)[:, None] * s[None, :]
        self._chain_w = (ub - ua)[:, None] * GAUSS12.weights[None, :]
        self._chain_N = hermite_basis(xi, 1.0 / n)[..., 0]  # (S, q, 4)
        th_idx = lay.theta_element_index()[e]
        j = np.arange(1, lay.n_points)
        pos = np.stack([lay.position_index(j - 1, 0), lay.position_index(j - 1, 1),
                        lay.position_index(j, 0), lay.position_index(j, 1)], 1)
        self._chain_theta_idx = th_idx
        local = np.concatenate([th_idx, np.full((len(j), 1), lay.lam_index), pos], 1)  # (S, 9)
        self._chain_local = local
        S = len(j)
        jidx = np.repeat(local[:, None, :], 2, axis=1).reshape(2 * S, 9)
        add("position_chain", 2 * S, 0.0, 0.0, np.stack([ua, ub], 1), jidx, self._eval_chain)

    def _setup_couplings(self, add):
        lay, pb = self.layout, self.problem
        n = lay.n
        for node, bc in ((0, pb.start), (n, pb.end)):
            if bc.speed > 0:
                idx = np.array([[lay.speed_index(node, 0), lay.speed_index(node, 1), lay.lam_index]])
                a = bc.tangential_acceleration
                add("boundary_accel", 1, 0.0, 0.0, np.array([node / n]), idx,
                    lambda z, idx=idx, a=a: self._eval_accel(z, idx, a))
        for node, bc in ((0, pb.start), (n, pb.end)):
            if bc.curvature != 0:
                idx = np.array([[lay.theta_index(node, 1), lay.lam_index]])
                k = bc.curvature
                add("boundary_curvature", 1, 0.0, 0.0, np.array([node / n]), idx,
                    lambda z, idx=idx, k=k: self._eval_curv(z, idx, k))

    def _setup_dynamic(self, add):
        lay, b, P = self.layout, self.problem.bounds, self.problem.P
        n = lay.n
        xi = np.tile((np.arange(P) + 0.5) / P, (n, 1))
        self._dyn_B = _element_basis_matrices(n, xi, lay.singular_left, lay.singular_right)
        lo = np.array([b.speed_min, b.tangential_accel_min, b.normal_accel_min,
                       b.angular_speed_min, b.curvature_min])
        hi = np.array([b.speed_max, b.tangential_accel_max, b.normal_accel_max,
                       b.angular_speed_max, b.curvature_max])
        nrows = 5 * n * P
        jidx = np.repeat(self._elem_idx[:, None, :], 5 * P, axis=1).reshape(nrows, 9)
        pts = ((np.arange(n)[:, None] + xi) / n).repeat(5, axis=1).ravel()
        add("dynamic_bound", nrows, np.tile(lo, n * P), np.tile(hi, n * P), pts, jidx,
            self._eval_dynamic,
            values=lambda z: _dynamic_quantities(self._pointwise(z, self._dyn_B), 0)[0].ravel())
        # one curvature row per element midpoint
        self._mid_B = _element_basis_matrices(n, np.full((n, 1), 0.5), lay.singular_left,
                                              lay.singular_right)
        add("dynamic_bound", n, b.curvature_min, b.curvature_max, (np.arange(n) + 0.5) / n,
            self._elem_idx, self._eval_midpoint,
            values=lambda z: _dynamic_quantities(self._pointwise(z, self._mid_B), 0)[0][..., 4].ravel())

    def _setup_obstacles(self, add):
        lay = self.layout
        N = lay.n_points
        j = np.arange(N)
        idx = np.stack([lay.position_index(j, 0), lay.position_index(j, 1)], 1)
        for i, o in enumerate(self.obstacles):
            add("obstacle_clearance", N, 0.0, INF, lay.point_u, idx,
                lambda z, y=None, o=o, idx=idx: self._eval_obstacle(z, o, idx, y),
                obstacle=i)
        self._obs_idx = idx

    def _setup_hessian_pattern(self):
        rows, cols = [], []
        r, c = _lower_pairs(self._f2f[self._elem_idx])
        self._hp_elem = (len(rows), r.size)
        rows.append(r.ravel()); cols.append(c.ravel())
        chain5 = self._f2f[self._chain_local[:, :5]]
        r, c = _lower_pairs(chain5)
        rows.append(r.ravel()); cols.append(c.ravel())
        cp = []
        for blk in self.blocks:
            if blk.kind in ("boundary_accel", "boundary_curvature"):
                cp.append(blk)
        self._coupling_blocks = cp
        lay = self.layout
        acc = [np.array([lay.speed_index(0 if blk.points[0] == 0 else lay.n, 0),
                         lay.speed_index(0 if blk.points[0] == 0 else lay.n, 1)])
               for blk in cp if blk.kind == "boundary_accel"]
        self._acc_idx = np.array(acc, dtype=np.int64).reshape(-1, 2)
        if len(acc):
            r, c = _lower_pairs(self._f2f[self._acc_idx])
            rows.append(r.ravel()); cols.append(c.ravel())
        if self.obstacles:
            r, c = _lower_pairs(self._f2f[self._obs_idx])
            rows.append(r.ravel()); cols.append(c.ravel())
        self._hess = _Pattern(np.concatenate(rows), np.concatenate(cols), (self.n, self.n))

    def _setup_bounds(self):
        lay, pb = self.layout, self.problem
        zl = np.full(lay.total, -INF)
        zu = np.full(lay.total, INF)
        zl[lay.lam_index] = pb.chord_length * (1 - 1e-9)
        zl[lay.speed_index(np.arange(lay.n + 1), 0)] = 0.0
        if lay.singular_left:
            zl[lay.speed_index(0, 1)] = 0.0
        if lay.singular_right:
            zl[lay.speed_index(lay.n, 1)] = 0.0
        free = lay.free
        self.x_lower = zl[free]
        self.x_upper = zu[free]

    # ------------------------------------------------------------ evaluation
    def expand(self, x):
        return self.layout.expand(np.asarray(x, dtype=float))

    def _state(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if key == self._cache_key:
            return self._cache
        z = self.expand(x)
        st = {"z": z}
        self._cache_key, self._cache = key, st
        return st

    def _pointwise(self, z, B):
        return (B @ z[self._elem_idx][:, None, :, None])[..., 0]

    def _objective_parts(self, x):
        st = self._state(x)
        if "obj" not in st:
            p = self._pointwise(st["z"], self._obj_B)
            if not np.all(p[..., V] > 0):
                st["obj"] = None
            else:
                t, jt, jn = integrand_derivatives(*np.moveaxis(p, -1, 0))
                st["obj"] = (p, t, jt, jn)
        if st["obj"] is None:
            raise NonFiniteIntegrand("speed not positive at a quadrature point")
        return st["obj"]

    def objective_terms(self, x):
        """Time, unweighted tangential and normal jerk integrals."""
        st = self._state(x)
        if "terms" not in st:
            p = self._pointwise(st["z"], self._obj_B)
            if not np.all(p[..., V] > 0):
                raise NonFiniteIntegrand("speed not positive at a quadrature point")
            w = self._obj_w
            st["terms"] = tuple(float(np.sum(w * f)) for f in integrand_values(*np.moveaxis(p, -1, 0)))
        return st["terms"]

    def objective(self, x) -> float:
        tau, jt, jn = self.objective_terms(x)
        return tau + self.weights.w_T * jt + self.weights.w_N * jn

    def _objective_local(self, x):
        _, t, jt, jn = self._objective_parts(x)
        wT, wN = self.weights.w_T, self.weights.w_N
        g = t[1] + wT * jt[1] + wN * jn[1]
        H = t[2] + wT * jt[2] + wN * jn[2]
        return g, H

    def gradient(self, x) -> np.ndarray:
        g, _ = self._objective_local(x)
        gl = _pull_back(self._obj_B, g, self._obj_w)
        out = np.zeros(self.layout.total)
        np.add.at(out, self._elem_idx, gl)
        return out[self.layout.free]

    def _block_values(self, x):
        st = self._state(x)
        if "con" not in st:
            z = st["z"]
            vals, jacs = [], []
            for ev in self._evals:
                v, j = ev(z)[:2]
                vals.append(v)
                jacs.append(j)
            st["con"] = (np.concatenate(vals) if vals else np.zeros(0),
                         np.concatenate([j.ravel() for j in jacs]) if jacs else np.zeros(0))
        return st["con"]

    def constraints(self, x) -> np.ndarray:
        st = self._state(x)
        if "con" in st:
            return st["con"][0]
        if "val" not in st:
            z = st["z"]
            vals = [ev(z) for ev in self._value_evals]
            st["val"] = np.concatenate(vals) if vals else np.zeros(0)
        return st["val"]

    def jacobian(self, x) -> sp.csr_matrix:
        return self._jac.matrix(self._block_values(x)[1])

    @property
    def jacobian_pattern(self):
        return self._jac.rows, self._jac.cols

    @property
    def hessian_pattern(self):
        return self._hess.rows, self._hess.cols

    def hessian(self, x, obj_factor: float, lagrange) -> sp.csr_matrix:
        """Lower triangle of ``obj_factor * Hess f + sum_i lagrange_i Hess g_i``."""
        lagrange = np.asarray(lagrange, dtype=float)
        st = self._state(x)
        z = st["z"]
        n = self.layout.n
        # per-element 9x9: objective and dynamic rows
        elem = np.zeros((n, 9, 9))
        if obj_factor != 0:
            _, H = self._objective_local(x)
            elem += obj_factor * _congruence(self._obj_B, H, self._obj_w)
        chain = np.zeros((len(self._chain_local), 5, 5))
        acc = np.zeros((len(self._acc_idx), 2, 2))
        obs = np.zeros((len(self._obs_idx), 2, 2))
        ai = 0
        for blk, ev in zip(self.blocks, self._evals):
            y = lagrange[blk.rows]
            if blk.kind == "position_chain":
                chain += self._chain_hessian(z, y)
            elif blk.kind == "boundary_accel":
                acc[ai, 0, 1] = acc[ai, 1, 0] = y[0]
                ai += 1
            elif blk.kind == "dynamic_bound":
                elem += ev(z, y)[2]
            elif blk.kind == "obstacle_clearance":
                obs += ev(z, y)[2]
        k9 = _tril_weights(9)
        parts = [(elem * k9).ravel(), (chain * _tril_weights(5)).ravel()]
        if len(acc):
            parts.append((acc * _tril_weights(2)).ravel())
        if self.obstacles:
            parts.append((obs * _tril_weights(2)).ravel())
        return self._hess.matrix(np.concatenate(parts))

    # -------------------------------------------------------- block kernels
    def _chain_geometry(self, z):
        th = np.einsum("sqk,sk->sq", self._chain_N, z[self._chain_theta_idx])
        return np.cos(th), np.sin(th)

    def _eval_chain(self, z):
        c, s = self._chain_geometry(z)
        lam = z[self.layout.lam_index]
        w, N = self._chain_w, self._chain_N
        ic, is_ = np.sum(w * c, 1), np.sum(w * s, 1)
        P = z[self._chain_local[:, 5:]]
        gx = P[:, 2] - P[:, 0] - lam * ic
        gy = P[:, 3] - P[:, 1] - lam * is_
        S = len(gx)
        J = np.zeros((S, 2, 9))
        J[:, 0, :4] = lam * np.einsum("sq,sqk->sk", w * s, N)
        J[:, 1, :4] = -lam * np.einsum("sq,sqk->sk", w * c, N)
        J[:, 0, 4], J[:, 1, 4] = -ic, -is_
        J[:, 0, 5], J[:, 0, 7] = -1.0, 1.0
        J[:, 1, 6], J[:, 1, 8] = -1.0, 1.0
        return np.stack([gx, gy], 1).ravel(), J.reshape(2 * S, 9)

    def _chain_hessian(self, z, y):
        c, s = self._chain_geometry(z)
        lam = z[self.layout.lam_index]
        w, N = self._chain_w, self._chain_N
        y = y.reshape(-1, 2)
        # x-row: lam*int cos N N, (k, lam): int sin N ; y-row: lam*int sin N N, -int cos N
        wq = w * (y[:, :1] * c + y[:, 1:] * s)
        H = np.zeros((len(y), 5, 5))
        H[:, :4, :4] = lam * np.einsum("sq,sqk,sql->skl", wq, N, N)
        cross = np.einsum("sq,sqk->sk", w * (y[:, :1] * s - y[:, 1:] * c), N)
        H[:, :4, 4] = cross
        H[:, 4, :4] = cross
        return H

    def _eval_accel(self, z, idx, a):
        v0, dv0, lam = z[idx[0]]
        return np.array([v0 * dv0 - a * lam]), np.array([[dv0, v0, -a]])

    def _eval_curv(self, z, idx, k):
        dth, lam = z[idx[0]]
        return np.array([dth - k * lam]), np.array([[1.0, -k]])

    def _eval_dynamic(self, z, y=None):
        p = self._pointwise(z, self._dyn_B)  # (n, P, 6)
        val, g, *H = _dynamic_quantities(p, 1 if y is None else 2)
        J = g @ self._dyn_B  # (n, P, 5, 9)
        out = [val.ravel(), J.reshape(-1, 9)]
        if y is not None:
            Hy = np.sum(y.reshape(val.shape)[..., None, None] * H[0], axis=2)
            out.append(_congruence(self._dyn_B, Hy))
        return out

    def _eval_midpoint(self, z, y=None):
        p = self._pointwise(z, self._mid_B)
        val, g, H = _dynamic_quantities(p)
        J = (g[..., 4, None, :] @ self._mid_B)[..., 0, :]
        out = [val[..., 4].ravel(), J.reshape(-1, 9)]
        if y is not None:
            Hy = y.reshape(-1, 1)[..., None, None] * H[..., 4, :, :]
            out.append(_congruence(self._mid_B, Hy))
        return out

    def _obstacle_points(self, z, idx):
        r = z[idx]
        return r

    def _eval_obstacle(self, z, o, idx, y=None):
        r = z[idx].copy()
        at_center = (r[:, 0] == o.center[0]) & (r[:, 1] == o.center[1])
        if np.any(at_center):
            r[at_center, 0] += 1e-9 * self.L_star
        val, g, H = clearance_derivatives(o, r)
        out = [val, g]
        if y is not None:
            out.append(y[:, None, None] * H)
        return out

    # --------------------------------------------------------- structure
    def variable_locations(self) -> np.ndarray:
        """Scaled arc-length position of every free unknown (lambda gets 2.0)."""
        lay = self.layout
        loc = np.empty(lay.total)
        nodes = np.arange(lay.n + 1) / lay.n
        loc[lay.theta_index(np.arange(lay.n + 1), 0)] = nodes
        loc[lay.theta_index(np.arange(lay.n + 1), 1)] = nodes
        loc[lay.speed_index(np.arange(lay.n + 1), 0)] = nodes
        loc[lay.speed_index(np.arange(lay.n + 1), 1)] = nodes
        loc[lay.lam_index] = 2.0
        j = np.arange(lay.n_points)
        # a position has no curvature of its own until obstacle multipliers are
        # active; it goes right after the chaining rows of its element, which
        # in turn follow the element's orientation unknowns
        pos = self._element_end(lay.point_u) + 1e-9
        loc[lay.position_index(j, 0)] = pos
        loc[lay.position_index(j, 1)] = pos
        return loc[lay.free]

    def _element_end(self, u):
        n = self.layout.n
        return np.ceil(np.asarray(u) * n - 1e-9) / n

    def constraint_locations(self) -> np.ndarray:
        loc = np.empty(self.m)
        for blk in self.blocks:
            pts = np.asarray(blk.points, dtype=float)
            if pts.ndim == 2:
                loc[blk.rows] = np.repeat(self._element_end(pts[:, 1]), 2)
            else:
                loc[blk.rows] = pts
        return loc

    @property
    def equality_count(self) -> int:
        return int(np.sum(self.g_lower == self.g_upper))

    # ------------------------------------------------------- conversions
    def pack(self, tv: TrajectoryVars) -> np.ndarray:
        lay = self.layout
        z = np.zeros(lay.total)
        z[:2 * (lay.n + 1)] = tv.theta.values.ravel()
        z[lay.speed_offset:lay.lam_index] = tv.speed.values.ravel()
        z[lay.lam_index] = tv.lam
        z[lay.position_offset:] = np.asarray(tv.positions, dtype=float).ravel()
        return z[lay.free]

    def unpack(self, x) -> TrajectoryVars:
        lay = self.layout
        z = self.expand(x)
        th = FieldCoefficients(z[:2 * (lay.n + 1)].copy())
        v = FieldCoefficients(z[lay.speed_offset:lay.lam_index].copy(), lay.singular_left,
                              lay.singular_right)
        return TrajectoryVars(th, v, float(z[lay.lam_index]),
                              z[lay.position_offset:].reshape(-1, 2).copy())

    def integrate_positions(self, theta: FieldCoefficients, lam: float) -> np.ndarray:
        """Auxiliary points obtained by chaining the increments from the start."""
        lay = self.layout
        z = np.zeros(lay.total)
        z[:2 * (lay.n + 1)] = theta.values.ravel()
        c, s = self._chain_geometry(z)
        inc = lam * np.stack([np.sum(self._chain_w * c, 1), np.sum(self._chain_w * s, 1)], 1)
        start = np.asarray(self.problem.start.position)
        return np.vstack([start, start + np.cumsum(inc, 0)])

    def initial_point(self, theta: FieldCoefficients, speed: FieldCoefficients, lam: float):
        pos = self.integrate_positions(theta, lam)
        pos[-1] = self.problem.end.position
        return self.pack(TrajectoryVars(theta, speed, lam, pos))


def build_objective(problem: PlanningProblem, weights: EffectiveWeights | None = None):
    """Objective evaluator ``(value, gradient, hessian)`` over the free unknowns."""
    nlp = DiscomfortNlp(problem, weights)
    return nlp.objective, nlp.gradient, lambda x: nlp.hessian(x, 1.0, np.zeros(nlp.m))


def assemble(problem: PlanningProblem, guess: TrajectoryVars | None = None,
             weights: EffectiveWeights | None = None) -> DiscomfortNlp:
    nlp = DiscomfortNlp(problem, weights)
    if guess is not None:
        nlp.x0 = nlp.pack(guess)
    return nlp

"""Primal-dual interior-point method for ``min f(x)`` s.t. ``gl <= g(x) <= gu``, ``xl <= x <= xu``.

Inequalities get slacks ``s`` with ``d(x) - s = 0``; bounds on ``x`` and ``s``
are handled by a log barrier with a monotone barrier-parameter schedule.
Each Newton system is condensed to the primal unknowns plus equality
multipliers and factored with inertia correction.

Two globalizations are available.  ``"filter"`` is a backtracking filter line
search on the pair (barrier objective, l1 infeasibility) with second-order
corrections; when it cannot find an acceptable step it falls back to one
step of the merit search.  ``"merit"`` backtracks on the exact l2-penalty
merit ``phi_mu(x, s) + nu ||(c(x), d(x) - s)||_2`` and never increases it
across accepted steps.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .ldl import COMPILED
from .linear import DENSE_LIMIT, DenseKkt, SingularKkt, factorize, solve_refined

STATUSES = ("converged", "iteration_limit", "infeasible", "numerical_failure")


@dataclass
class SolverOptions:
    relative_tolerance: float = 1e-8
    max_iterations: int = 500
    feasibility_tolerance: float = 1e-6
    mu_init: float = 0.1
    bound_push: float = 1e-2
    linear_solver: str = "auto"
    globalization: str = "filter"
    log: Callable[["IterationRecord"], None] | None = None

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.feasibility_tolerance > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.linear_solver not in ("auto", "dense", "sparse"):
            raise ValueError("linear_solver must be auto, dense or sparse")
        if self.globalization not in ("filter", "merit"):
            raise ValueError("globalization must be filter or merit")


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    inf_pr: float
    inf_du: float
    mu: float
    alpha: float
    alpha_dual: float
    delta_w: float
    ls_trials: int
    merit_before: float
    merit_after: float
    step_kind: str = "merit"

    def line(self) -> str:
        """One JSON object; non-finite values are written as ``null``."""
        d = {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
             for k, v in asdict(self).items()}
        return json.dumps(d)


@dataclass
class SolveReport:
    status: str
    iterations: int
    x: np.ndarray
    objective: float
    max_violation: float
    multipliers: np.ndarray
    history: list = field(default_factory=list)
    message: str = ""
    kkt_error: float = math.inf
    initial_gradient_norm: float = math.nan

    @property
    def converged(self) -> bool:
        return self.status == "converged"


class _EvalError(Exception):
    pass


def _safe(fn, *args):
    try:
        with np.errstate(all="ignore"):
            out = fn(*args)
    except (FloatingPointError, ValueError, ZeroDivisionError) as exc:
        raise _EvalError(str(exc)) from exc
    if sp.issparse(out):
        if not np.all(np.isfinite(out.data)):
            raise _EvalError("non-finite derivative")
    elif not np.all(np.isfinite(out)):
        raise _EvalError("non-finite value")
    return out


def _dense_to_sparse(a):
    return a if sp.issparse(a) else sp.csr_matrix(np.atleast_2d(a))


def _push(v, lo, hi, kappa):
    """Move ``v`` strictly inside ``[lo, hi]`` (Ipopt-style bound push)."""
    v = v.copy()
    span = hi - lo
    pl = np.where(np.isfinite(lo), kappa * np.maximum(1.0, np.abs(lo)), 0.0)
    pu = np.where(np.isfinite(hi), kappa * np.maximum(1.0, np.abs(hi)), 0.0)
    both = np.isfinite(span)
    pl = np.where(both, np.minimum(pl, kappa * span), pl)
    pu = np.where(both, np.minimum(pu, kappa * span), pu)
    v = np.where(np.isfinite(lo), np.maximum(v, lo + pl), v)
    v = np.where(np.isfinite(hi), np.minimum(v, hi - pu), v)
    return v


def _max_step(v, dv, lo, hi, tau):
    """Largest alpha in (0, 1] keeping ``v + alpha dv`` a fraction ``tau`` inside."""
    alpha = 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        m = np.isfinite(lo) & (dv < 0)
        if np.any(m):
            alpha = min(alpha, float(np.min(-tau * (v[m] - lo[m]) / dv[m])))
        m = np.isfinite(hi) & (dv > 0)
        if np.any(m):
            alpha = min(alpha, float(np.min(tau * (hi[m] - v[m]) / dv[m])))
    return alpha


def _max_dual_step(z, dz, tau):
    m = dz < 0
    if not np.any(m):
        return 1.0
    return min(1.0, float(np.min(-tau * z[m] / dz[m])))


class _Problem:
    """Normalized view of a user NLP: equality/inequality split and caching."""

    def __init__(self, nlp):
        self.nlp = nlp
        self.n = int(nlp.n)
        gl = np.asarray(nlp.g_lower, dtype=float)
        gu = np.asarray(nlp.g_upper, dtype=float)
        self.m = len(gl)
        self.E = np.flatnonzero(gl == gu)
        self.I = np.flatnonzero(gl != gu)
        self.ce = gl[self.E]
        self.dl = gl[self.I]
        self.du = gu[self.I]
        self.xl = np.asarray(nlp.x_lower, dtype=float)
        self.xu = np.asarray(nlp.x_upper, dtype=float)

    def f(self, x):
        return float(_safe(self.nlp.objective, x))

    def grad(self, x):
        return np.asarray(_safe(self.nlp.gradient, x), dtype=float).ravel()

    def g(self, x):
        if self.m == 0:
            return np.zeros(0)
        return np.asarray(_safe(self.nlp.constraints, x), dtype=float).ravel()

    def jac(self, x):
        if self.m == 0:
            return sp.csr_matrix((0, self.n))
        return sp.csr_matrix(_dense_to_sparse(_safe(self.nlp.jacobian, x)))

    def hess(self, x, y):
        Hl = sp.csr_matrix(_dense_to_sparse(_safe(self.nlp.hessian, x, 1.0, y)))
        Hl = sp.tril(Hl)
        return (Hl + Hl.T - sp.diags(Hl.diagonal())).tocsr()

    def ordering(self):
        n, mE = self.n, len(self.E)
        if hasattr(self.nlp, "variable_locations") and hasattr(self.nlp, "constraint_locations"):
            lx = np.asarray(self.nlp.variable_locations(), dtype=float)
            lc = np.asarray(self.nlp.constraint_locations(), dtype=float)[self.E]
        else:
            lx = np.arange(n) / max(n, 1)
            lc = np.full(mE, 1.5)
        loc = np.concatenate([lx, lc])
        kind = np.concatenate([np.zeros(n), np.ones(mE)])
        return np.lexsort((np.arange(n + mE), kind, loc))


def solve(nlp, x0, opts: SolverOptions | None = None) -> SolveReport:
    """Run the interior-point method from ``x0``; never raises on non-convergence."""
    opts = opts or SolverOptions()
    P = _Problem(nlp)
    return _Ipm(P, opts).run(np.asarray(x0, dtype=float))


class _Ipm:
    kappa_eps = 10.0
    kappa_mu = 0.2
    theta_mu = 1.5
    tau_min = 0.99
    kappa_sigma = 1e10
    eta = 1e-4
    rho = 0.1
    s_max = 100.0

    def __init__(self, P: _Problem, opts: SolverOptions):
        self.P = P
        self.o = opts
        self.history: list[IterationRecord] = []
        self.delta_w_last = 0.0
        self.nu = 1.0
        self.filter: list[tuple[float, float]] = []
        self.theta_max = self.theta_min = math.inf
        self.perm = None
        sparse = {"auto": None, "dense": False, "sparse": True}[opts.linear_solver]
        self.sparse = sparse

    # ------------------------------------------------------------ helpers
    def _eval_point(self, x, s):
        P = self.P
        g = P.g(x)
        c = g[P.E] - P.ce
        r = g[P.I] - s
        return g, c, r

    def _barrier(self, x, s, mu):
        P = self.P
        val = 0.0
        for v, lo, hi in ((x, P.xl, P.xu), (s, P.dl, P.du)):
            ml, mu_ = np.isfinite(lo), np.isfinite(hi)
            dl = v[ml] - lo[ml]
            du = hi[mu_] - v[mu_]
            if np.any(dl <= 0) or np.any(du <= 0):
                return math.inf
            val -= mu * (np.sum(np.log(dl)) + np.sum(np.log(du)))
        return val

    def _merit(self, x, s, mu):
        try:
            f = self.P.f(x)
            _, c, r = self._eval_point(x, s)
        except _EvalError:
            return math.inf, math.inf, math.inf
        b = self._barrier(x, s, mu)
        theta = float(np.sqrt(np.dot(c, c) + np.dot(r, r)))
        return f + b + self.nu * theta, theta, f

    def _violation(self, x, g):
        P = self.P
        v = 0.0
        if P.m:
            gl = np.asarray(P.nlp.g_lower, dtype=float)
            gu = np.asarray(P.nlp.g_upper, dtype=float)
            with np.errstate(invalid="ignore"):
                v = max(v, float(np.max(np.maximum(gl - g, 0.0), initial=0.0)))
                v = max(v, float(np.max(np.maximum(g - gu, 0.0), initial=0.0)))
        v = max(v, float(np.max(np.maximum(P.xl - x, 0.0), initial=0.0)))
        v = max(v, float(np.max(np.maximum(x - P.xu, 0.0), initial=0.0)))
        return v

    def _report(self, status, it, x, y, f, g, msg="", kkt=math.inf):
        viol = self._violation(x, g) if g is not None else math.inf
        if status == "converged" and viol > self.o.feasibility_tolerance:
            status = "infeasible"
        return SolveReport(status, it, x, f, viol, y, self.history, msg, kkt, self.gnorm0)

    # ------------------------------------------------------------ main loop
    def run(self, x0) -> SolveReport:
        P, o = self.P, self.o
        n = P.n
        x = _push(x0, P.xl, P.xu, o.bound_push)
        self.gnorm0 = math.nan
        try:
            f = P.f(x)
            g = P.g(x)
        except _EvalError:
            # one deterministic perturbation retry
            x = _push(x0 + 1e-7 * (1 + np.abs(x0)) * np.where(np.arange(n) % 2, 1, -1),
                      P.xl, P.xu, o.bound_push)
            try:
                f = P.f(x)
                g = P.g(x)
            except _EvalError as exc:
                return SolveReport("numerical_failure", 0, x0, math.nan, math.inf,
                                   np.zeros(P.m), [], f"evaluation failed at x0: {exc}")
        s = _push(g[P.I], P.dl, P.du, o.bound_push)
        y = np.zeros(P.m)
        lo_x, hi_x = np.isfinite(P.xl), np.isfinite(P.xu)
        lo_s, hi_s = np.isfinite(P.dl), np.isfinite(P.du)
        zl = np.where(lo_x, 1.0, 0.0)
        zu = np.where(hi_x, 1.0, 0.0)
        vl = np.where(lo_s, 1.0, 0.0)
        vu = np.where(hi_s, 1.0, 0.0)
        mu = o.mu_init
        tol = o.relative_tolerance
        if self.sparse is not False:
            self.perm = P.ordering()

        it = 0
        grad0 = None
        while True:
            try:
                f = P.f(x)
                gf = P.grad(x)
                g = P.g(x)
                J = P.jac(x)
            except _EvalError as exc:
                return self._report("numerical_failure", it, x, y, math.nan, None, str(exc))
            if grad0 is None:
                grad0 = gf
                th_init = float(np.sum(np.abs(g[P.E] - P.ce)) + np.sum(np.abs(g[P.I] - s)))
                self.theta_max = 1e4 * max(1.0, th_init)
                self.theta_min = 1e-4 * max(1.0, th_init)
                self.gnorm0 = float(np.linalg.norm(gf, np.inf))
                gscale = max(1.0, self.gnorm0)
            JE, JI = J[P.E], J[P.I]
            c = g[P.E] - P.ce
            r = g[P.I] - s
            yE, yI = y[P.E], y[P.I]
            sxl = np.where(lo_x, x - P.xl, 1.0)
            sxu = np.where(hi_x, P.xu - x, 1.0)
            ssl = np.where(lo_s, s - P.dl, 1.0)
            ssu = np.where(hi_s, P.du - s, 1.0)
            Jy = JE.T @ yE + JI.T @ yI
            dual_x = gf + Jy - zl + zu
            dual_s = -yI - vl + vu
            kkt = float(np.max(np.abs(dual_x), initial=0.0))
            primal = max(float(np.max(np.abs(c), initial=0.0)), float(np.max(np.abs(r), initial=0.0)))
            nmult = P.m + int(lo_x.sum() + hi_x.sum() + lo_s.sum() + hi_s.sum())
            zsum = np.sum(np.abs(y)) + np.sum(zl) + np.sum(zu) + np.sum(vl) + np.sum(vu)
            s_d = max(self.s_max, zsum / max(nmult, 1)) / self.s_max
            zb = np.sum(zl) + np.sum(zu) + np.sum(vl) + np.sum(vu)
            s_c = max(self.s_max, zb / max(nmult - P.m, 1)) / self.s_max

            def err(mu_):
                comp = 0.0
                for z_, sl_, m_ in ((zl, sxl, lo_x), (zu, sxu, hi_x), (vl, ssl, lo_s), (vu, ssu, hi_s)):
                    if np.any(m_):
                        comp = max(comp, float(np.max(np.abs(z_[m_] * sl_[m_] - mu_))))
                du = max(float(np.max(np.abs(dual_x), initial=0.0)),
                         float(np.max(np.abs(dual_s), initial=0.0))) / (s_d * gscale)
                return max(du, primal, comp / s_c)

            if err(0.0) <= tol and self._violation(x, g) <= o.feasibility_tolerance:
                return self._report("converged", it, x, y, f, g, "optimal", kkt)
            if it >= o.max_iterations:
                return self._report("iteration_limit", it, x, y, f, g, "iteration limit", kkt)
            while err(mu) <= self.kappa_eps * mu and mu > tol / 10:
                mu = max(tol / 10, min(self.kappa_mu * mu, mu**self.theta_mu))
                self.filter = []
                self.nu = 1.0 if self.nu < 1.0 else self.nu
            tau = max(self.tau_min, 1 - mu)

            try:
                W = P.hess(x, y)
            except _EvalError as exc:
                return self._report("numerical_failure", it, x, y, f, g, str(exc))
            sig_x = np.where(lo_x, zl / sxl, 0.0) + np.where(hi_x, zu / sxu, 0.0)
            sig_s = np.where(lo_s, vl / ssl, 0.0) + np.where(hi_s, vu / ssu, 0.0)
            gphi_x = gf - np.where(lo_x, mu / sxl, 0.0) + np.where(hi_x, mu / sxu, 0.0)
            gphi_s = -np.where(lo_s, mu / ssl, 0.0) + np.where(hi_s, mu / ssu, 0.0)
            r_x = gphi_x + Jy
            r_s = gphi_s - yI

            state = dict(W=W, JE=JE, JI=JI, sig_x=sig_x, sig_s=sig_s, r_x=r_x, r_s=r_s, c=c, r=r)
            step = None
            delta_w = None
            merit0 = None
            for attempt in range(4):
                sol = self._direction(state, mu, min_delta=delta_w)
                if sol is None:
                    return self._report("numerical_failure", it, x, y, f, g,
                                        "KKT factorization failed", kkt)
                dx, ds, dyE, dyI, delta_w, quad = sol
                # penalty parameter update and directional derivative
                theta0 = float(np.sqrt(np.dot(c, c) + np.dot(r, r)))
                dphi = float(gphi_x @ dx + gphi_s @ ds)
                if theta0 > 0:
                    sigma = 1.0 if quad > 0 else 0.0
                    nu_trial = (dphi + 0.5 * sigma * quad) / ((1 - self.rho) * theta0)
                    if self.nu < nu_trial:
                        self.nu = nu_trial + 1.0
                dmerit = dphi - self.nu * theta0
                alpha_max = min(_max_step(x, dx, P.xl, P.xu, tau), _max_step(s, ds, P.dl, P.du, tau))
                if o.globalization == "filter":
                    step = self._filter_search(x, s, dx, ds, alpha_max, dphi, mu, state, tau)
                    if step is not None:
                        merit0 = step[-1]
                        step = step[:-1]
                        break
                merit0, _, _ = self._merit(x, s, mu)
                step = self._line_search(x, s, dx, ds, alpha_max, merit0, dmerit, mu, state, tau)
                if step is not None:
                    # the filter may reject the new point; start it afresh
                    self.filter = []
                    step = step + ("merit",)
                    break
                delta_w = max(1e-4, 10.0 * delta_w) if delta_w else 1e-4
                delta_w *= 100.0 ** attempt
            if step is None:
                status = "infeasible" if primal > o.feasibility_tolerance else "numerical_failure"
                return self._report(status, it, x, y, f, g, "line search failed", kkt)
            alpha, dx, ds, trials, merit1, kind = step

            # dual step
            dzl = np.where(lo_x, mu / sxl - zl - zl / sxl * dx, 0.0)
            dzu = np.where(hi_x, mu / sxu - zu + zu / sxu * dx, 0.0)
            dvl = np.where(lo_s, mu / ssl - vl - vl / ssl * ds, 0.0)
            dvu = np.where(hi_s, mu / ssu - vu + vu / ssu * ds, 0.0)
            alpha_z = min(_max_dual_step(zl, dzl, tau), _max_dual_step(zu, dzu, tau),
                          _max_dual_step(vl, dvl, tau), _max_dual_step(vu, dvu, tau))
            x = x + alpha * dx
            s = s + alpha * ds
            y[P.E] += alpha * dyE
            y[P.I] += alpha * dyI
            zl, zu = zl + alpha_z * dzl, zu + alpha_z * dzu
            vl, vu = vl + alpha_z * dvl, vu + alpha_z * dvu
            # keep the bound multipliers near the central path
            zl, zu = self._clip(zl, x - P.xl, lo_x, mu), self._clip(zu, P.xu - x, hi_x, mu)
            vl, vu = self._clip(vl, s - P.dl, lo_s, mu), self._clip(vu, P.du - s, hi_s, mu)
            it += 1
            rec = IterationRecord(it, f, primal, kkt, mu, alpha, alpha_z, delta_w, trials,
                                  merit0, merit1, kind)
            self.history.append(rec)
            if o.log is not None:
                o.log(rec)

    def _clip(self, z, slack, mask, mu):
        if not np.any(mask):
            return z
        k = self.kappa_sigma
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = k * mu / slack
            lo = mu / (k * slack)
        return np.where(mask, np.clip(z, lo, hi), z)

    # ---------------------------------------------------------- linear algebra
    def _dense(self) -> bool:
        if self.sparse is not None:
            return not self.sparse
        return not COMPILED or self.P.n + len(self.P.E) < DENSE_LIMIT

    def _assemble(self, st, delta_w):
        JI = st["JI"]
        D_s = st["sig_s"] + delta_w
        if self._dense():
            # small systems: numpy blocks avoid the scipy.sparse construction overhead
            if "Wd" not in st:
                st["Wd"] = st["W"].toarray()
                st["JId"] = JI.toarray()
            H = st["Wd"].copy()
            H[np.diag_indices_from(H)] += st["sig_x"] + delta_w
            if JI.shape[0]:
                H += (st["JId"].T * D_s) @ st["JId"]
            return H, D_s
        H = st["W"] + sp.diags(st["sig_x"] + delta_w)
        if JI.shape[0]:
            H = H + (JI.T @ sp.diags(D_s) @ JI)
        return sp.csr_matrix(H), D_s

    def _solve_condensed(self, fac, st, D_s, r_x, r_s, c, r):
        JI = st["JI"]
        n = self.P.n
        rhs_x = -r_x - (JI.T @ (D_s * r + r_s) if JI.shape[0] else 0.0)
        rhs = np.concatenate([rhs_x, -c])
        sol, rel = solve_refined(fac, rhs)
        dx = sol[:n]
        dyE = sol[n:]
        ds = JI @ dx + r if JI.shape[0] else np.zeros(0)
        dyI = D_s * ds + r_s
        return dx, ds, dyE, dyI, rel

    def _factor(self, H, JE, delta_c):
        try:
            if isinstance(H, np.ndarray):
                mE = JE.shape[0]
                JEd = JE.toarray()
                K = np.block([[H, JEd.T], [JEd, -delta_c * np.eye(mE)]])
                return DenseKkt(K)
            return factorize(H, JE, delta_c, self.perm, sparse=self.sparse)
        except (SingularKkt, ValueError, np.linalg.LinAlgError):
            return None

    def _direction(self, st, mu, min_delta=None):
        """Inertia-corrected Newton direction; returns None if hopeless."""
        P = self.P
        n, mE = P.n, len(P.E)
        JE = st["JE"]
        delta_c = 0.0
        delta_w = min_delta or 0.0
        first = True
        for _ in range(60):
            H, D_s = self._assemble(st, delta_w)
            fac = self._factor(H, JE, delta_c)
            ok = fac is not None and fac.inertia == (n, mE, 0)
            if ok:
                dx, ds, dyE, dyI, rel = self._solve_condensed(
                    fac, st, D_s, st["r_x"], st["r_s"], st["c"], st["r"])
                if np.isfinite(rel) and rel < 1e-6 and np.all(np.isfinite(dx)):
                    self.delta_w_last = delta_w if delta_w > 0 else self.delta_w_last
                    self._fac, self._D_s = fac, D_s
                    quad = float(dx @ (st["W"] @ dx) + dx @ (st["sig_x"] * dx)
                                 + ds @ (st["sig_s"] * ds))
                    return dx, ds, dyE, dyI, delta_w, quad
                if fac.kind == "sparse" and self.sparse is None:
                    # unpivoted factor lost accuracy: use the dense path for this solve
                    self.sparse = False
                    continue
            if (fac is not None and fac.kind == "sparse" and fac.factor is None
                    and self.sparse is None and (delta_c > 0 or mE == 0)):
                # zero pivot under the static ordering: pivoted dense factorization from here on
                self.sparse = False
                continue
            if fac is not None and fac.inertia[2] > 0 and delta_c == 0.0 and mE > 0:
                delta_c = 1e-8 * mu**0.25
                continue
            if delta_w == 0.0:
                delta_w = 1e-4 if self.delta_w_last == 0 else max(1e-20, self.delta_w_last / 3)
            else:
                delta_w *= 100.0 if (first and self.delta_w_last == 0) else 8.0
            first = False
            if delta_w > 1e40:
                return None
        return None

    def _line_search(self, x, s, dx, ds, alpha_max, merit0, dmerit, mu, st, tau):
        P = self.P
        alpha = alpha_max
        trials = 0
        if not np.isfinite(merit0):
            return None
        if dmerit > -1e-14 * max(1.0, abs(merit0)):
            # stationary for the barrier problem: take the (tiny) step
            m1, _, _ = self._merit(x + alpha * dx, s + alpha * ds, mu)
            if m1 <= merit0 + 1e-12 * max(1.0, abs(merit0)):
                return alpha, dx, ds, 1, m1
        soc_done = False
        while alpha > 1e-12:
            trials += 1
            xt, st_ = x + alpha * dx, s + alpha * ds
            m1, theta1, _ = self._merit(xt, st_, mu)
            if m1 <= merit0 + self.eta * alpha * dmerit:
                return alpha, dx, ds, trials, m1
            if not soc_done and alpha == alpha_max and np.isfinite(m1) and (len(P.E) or len(P.I)):
                soc_done = True
                soc = self._soc(xt, st_, dx, ds, mu, st, tau, x, s)
                if soc is not None:
                    dxs, dss, a_soc = soc
                    m2, _, _ = self._merit(x + a_soc * dxs, s + a_soc * dss, mu)
                    trials += 1
                    if m2 <= merit0 + self.eta * alpha * dmerit:
                        return a_soc, dxs, dss, trials, m2
            alpha *= 0.5
        return None

    # ------------------------------------------------------------ filter
    gamma_theta = 1e-5
    gamma_phi = 1e-8
    gamma_alpha = 0.05
    s_phi = 2.3
    s_theta = 1.1
    delta_switch = 1.0
    max_soc = 4

    def _measures(self, x, s, mu):
        """Barrier objective and l1 infeasibility, ``inf`` where undefined."""
        try:
            f = self.P.f(x)
            _, c, r = self._eval_point(x, s)
        except _EvalError:
            return math.inf, math.inf, None, None
        return f + self._barrier(x, s, mu), float(np.sum(np.abs(c)) + np.sum(np.abs(r))), c, r

    def _filtered(self, phi, theta):
        return any(theta >= th and phi >= ph for th, ph in self.filter)

    def _filter_search(self, x, s, dx, ds, alpha_max, dphi, mu, st, tau):
        """Backtracking filter line search; ``None`` when alpha drops below its floor.

        Returns ``(alpha, dx, ds, trials, phi_after, kind, phi_before)`` where
        ``kind`` is ``"f"`` for an objective-decrease step and ``"h"`` for an
        infeasibility-driven step.
        """
        P = self.P
        phi0, th0, c0, r0 = self._measures(x, s, mu)
        if not (np.isfinite(phi0) and np.isfinite(th0)):
            return None
        gt, gp = self.gamma_theta, self.gamma_phi
        if dphi < 0:
            a_min = min(gt, gp * th0 / -dphi,
                        self.delta_switch * th0**self.s_theta / (-dphi) ** self.s_phi)
        else:
            a_min = gt
        a_min *= self.gamma_alpha
        if th0 == 0.0 and dphi < 0:
            a_min = 1e-12

        def verdict(phi1, th1, alpha):
            if not (np.isfinite(phi1) and np.isfinite(th1)) or th1 > self.theta_max:
                return None
            if self._filtered(phi1, th1):
                return None
            switching = dphi < 0 and alpha * (-dphi) ** self.s_phi > self.delta_switch * th0**self.s_theta
            if th0 <= self.theta_min and switching:
                return "f" if phi1 <= phi0 + self.eta * alpha * dphi else None
            if th1 <= (1 - gt) * th0 or phi1 <= phi0 - gp * th0:
                return "h"
            return None

        def accept(alpha, dx_, ds_, trials, phi1, kind):
            if kind == "h":
                entry = ((1 - gt) * th0, phi0 - gp * th0)
                self.filter = [e for e in self.filter if not (e[0] >= entry[0] and e[1] >= entry[1])]
                self.filter.append(entry)
            return alpha, dx_, ds_, trials, phi1, kind, phi0

        alpha = alpha_max
        trials = 0
        has_rows = bool(len(P.E) or len(P.I))
        while alpha >= a_min:
            trials += 1
            xt, s_t = x + alpha * dx, s + alpha * ds
            phi1, th1, c1, r1 = self._measures(xt, s_t, mu)
            kind = verdict(phi1, th1, alpha)
            if kind is not None:
                return accept(alpha, dx, ds, trials, phi1, kind)
            if trials == 1 and has_rows and c1 is not None and th1 >= th0:
                # second-order corrections on the full step
                c_soc, r_soc = alpha * c0 + c1, alpha * r0 + r1
                a_soc, th_old = alpha, th0
                for _ in range(self.max_soc):
                    cx, cs, _, _, rel = self._solve_condensed(
                        self._fac, st, self._D_s, st["r_x"], st["r_s"], c_soc, r_soc)
                    if not np.isfinite(rel) or rel > 1e-6:
                        break
                    a_soc = min(_max_step(x, cx, P.xl, P.xu, tau), _max_step(s, cs, P.dl, P.du, tau))
                    trials += 1
                    phi2, th2, c2, r2 = self._measures(x + a_soc * cx, s + a_soc * cs, mu)
                    kind = verdict(phi2, th2, alpha)
                    if kind is not None:
                        return accept(a_soc, cx, cs, trials, phi2, kind)
                    if c2 is None or th2 > 0.99 * th_old:
                        break
                    th_old = th2
                    c_soc, r_soc = a_soc * c_soc + c2, a_soc * r_soc + r2
            alpha *= 0.5
        return None

    def _soc(self, xt, s_t, dx, ds, mu, st, tau, x, s):
        P = self.P
        try:
            _, c_t, r_t = self._eval_point(xt, s_t)
        except _EvalError:
            return None
        n = P.n
        zero_x = np.zeros(n)
        zero_s = np.zeros(len(P.I))
        cx, cs, _, _, rel = self._solve_condensed(self._fac, st, self._D_s, zero_x, zero_s, c_t, r_t)
        if not np.isfinite(rel) or rel > 1e-6:
            return None
        dxs, dss = dx + cx, ds + cs
        a = min(_max_step(x, dxs, P.xl, P.xu, tau), _max_step(s, dss, P.dl, P.du, tau))
        return dxs, dss, a

"""Time-domain conversion, cost decomposition and sampled trajectory tables.

A solution lives on the scaled arc-length domain ``u in [0, 1]``.  Time
follows from ``dt = lam / v du``; near a zero-speed end ``v ~ u^(2/3)`` and
the substitution ``u = u_end + h s^3`` keeps the integrand bounded.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import PlanningProblem
from .fem import (
    GAUSS12, FieldCoefficients, singular_mode, evaluate_field, hermite_basis, singular_basis,
)
from .weights import EffectiveWeights

DEFAULT_ROWS = 4096
TABLE_HEADER = ("t", "x", "y", "theta", "v", "a_t", "a_n", "kappa", "omega")


class TimeMapDivergence(ArithmeticError):
    """Raised when the speed vanishes inside the domain."""


@dataclass
class Solution:
    """One solved (or seeded) variant in structured form."""

    problem: PlanningProblem
    theta: FieldCoefficients
    speed: FieldCoefficients
    lam: float
    weights: EffectiveWeights
    variant: str = "base_A"
    status: str = "converged"
    iterations: int = 0
    objective: float = math.nan
    max_violation: float = math.nan
    history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass(frozen=True)
class TimeTable:
    u: np.ndarray
    t: np.ndarray

    @property
    def tau(self) -> float:
        return float(self.t[-1])

    def u_at(self, t):
        return np.interp(t, self.t, self.u)


@dataclass(frozen=True)
class TrajectoryTable:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    v: np.ndarray
    a_t: np.ndarray
    a_n: np.ndarray
    kappa: np.ndarray
    omega: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def columns(self) -> np.ndarray:
        return np.stack([getattr(self, k) for k in TABLE_HEADER], 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(TABLE_HEADER) + "\n")
        for row in self.columns():
            buf.write(",".join(f"{val:.9g}" for val in row) + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class CostReport:
    """``total = tau + f_T * J_T + f_N * J_N``.

    ``J_T`` and ``J_N`` are the jerk integrals times the base weight, without
    the user factors; ``int_jt2`` and ``int_jn2`` are the bare integrals.
    """

    tau: float
    J_T: float
    J_N: float
    total: float
    f_T: float
    f_N: float
    int_jt2: float
    int_jn2: float

    def to_dict(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------ time map
def _panel_rules(n: int, per_element: int, singular_left: bool, singular_right: bool):
    """Panels of the time table: ``(edges, element, xi, weights, tail)``.

    Regular elements are split uniformly; on a singular element the split and
    the Gauss points are uniform in ``s`` with ``xi = s^3`` measured from the
    singular end.  ``xi`` is the local coordinate of every Gauss point, so
    callers can evaluate the fields without round-tripping through ``u``;
    ``tail`` is ``1 - xi`` computed without cancellation.
    """
    h = 1.0 / n
    k = per_element
    s_edges = np.arange(k + 1) / k
    gp, gw = GAUSS12.points, GAUSS12.weights
    edges, elem, pts, wts, tails = [], [], [], [], []
    for e in range(n):
        s = s_edges[:-1, None] + gp[None, :] / k
        if e == 0 and singular_left:
            xi_edges, xi = s_edges**3, s**3
            w = 3 * s**2 * gw[None, :] / k * h
        elif e == n - 1 and singular_right:
            s = s[::-1, ::-1]
            xi_edges, xi = 1.0 - s_edges[::-1] ** 3, 1.0 - s**3
            w = 3 * s**2 * gw[None, :] / k * h
            tails.append(s**3)
        else:
            xi_edges, xi = s_edges, s
            w = np.broadcast_to(gw[None, :] / k * h, xi.shape)
        edges.append(e * h + h * xi_edges[:-1])
        elem.append(np.full(xi.shape, e))
        pts.append(xi)
        wts.append(w)
        if len(tails) < len(wts):
            tails.append(1.0 - xi)
    edges.append(np.array([1.0]))
    return (np.concatenate(edges), np.concatenate(elem), np.concatenate(pts),
            np.concatenate(wts), np.concatenate(tails))


def _cumulative_time(v, w, lam, edges) -> TimeTable:
    if not np.all(v > 0):
        raise TimeMapDivergence("speed vanishes inside the domain")
    t = np.concatenate([[0.0], np.cumsum(lam * np.sum(w / v, axis=1))])
    if not np.all(np.isfinite(t)):
        raise TimeMapDivergence("time integral is not finite")
    return TimeTable(edges, t)


def time_map_function(speed, lam: float, n: int = 32, rows: int = DEFAULT_ROWS,
                      singular_left: bool = False, singular_right: bool = False) -> TimeTable:
    """Cumulative ``t(u) = int_0^u lam / v`` for a callable speed ``v(u)``.

    ``n`` sets the element grid that the graded panels follow; the table has
    about ``rows`` intervals.
    """
    if rows < 1:
        raise ValueError("need at least one table interval")
    edges, e, xi, w, _ = _panel_rules(n, max(1, -(-rows // n)), singular_left, singular_right)
    v = np.asarray(speed(((e + xi) / n).ravel()), dtype=float).reshape(xi.shape)
    return _cumulative_time(v, w, lam, edges)


def _local_speed(c: FieldCoefficients, e, xi, tail):
    n = c.mesh.n
    h = 1.0 / n
    basis = hermite_basis(xi, h)[..., 0]
    if c.singular_left:
        sel = e == 0
        basis[sel] = singular_basis(xi[sel], h, "left")[..., 0]
    if c.singular_right:
        sel = e == n - 1
        basis[sel] = singular_basis(xi[sel], h, "right")[..., 0]
        basis[sel, 3] = singular_mode(tail[sel])[0]
    return np.einsum("...k,...k->...", basis, c.element_dofs()[e])


def time_map(solution: Solution, samples: int = DEFAULT_ROWS) -> TimeTable:
    """Time table of a solution with about ``samples`` intervals."""
    sp = solution.speed
    n = sp.mesh.n
    if samples < 1:
        raise ValueError("need at least one table interval")
    edges, e, xi, w, tail = _panel_rules(n, max(1, -(-samples // n)), sp.singular_left,
                                         sp.singular_right)
    return _cumulative_time(_local_speed(sp, e, xi, tail), w, solution.lam, edges)


# ------------------------------------------------------------ costs
def cost_report(solution: Solution, nlp=None) -> CostReport:
    """Cost terms computed with the same quadrature as the objective."""
    from .assembly import DiscomfortNlp, TrajectoryVars

    if nlp is None:
        nlp = DiscomfortNlp(solution.problem, solution.weights)
    lay = nlp.layout
    pos = np.zeros((lay.n_points, 2))
    x = nlp.pack(TrajectoryVars(solution.theta, solution.speed, solution.lam, pos))
    tau, it, jn = nlp.objective_terms(x)
    f = solution.problem.weights
    w = solution.weights
    if solution.problem.weights_override is not None:
        f_T = f_N = 1.0
    else:
        f_T, f_N = f.f_T, f.f_N
    J_T, J_N = w.w_T / f_T * it, w.w_N / f_N * jn
    total = tau + w.w_T * it + w.w_N * jn
    return CostReport(tau, J_T, J_N, total, f_T, f_N, it, jn)


# ------------------------------------------------------------ sampling
def _positions(solution: Solution, table: TimeTable, u: np.ndarray) -> np.ndarray:
    """Exact-to-quadrature positions at ``u`` by chaining table panels."""
    th = solution.theta
    gp, gw = GAUSS12.points, GAUSS12.weights

    def increments(a, b):
        pts = a[:, None] + (b - a)[:, None] * gp[None, :]
        ang = evaluate_field(th, pts)[0]
        wt = (b - a)[:, None] * gw[None, :] * solution.lam
        return np.stack([np.sum(wt * np.cos(ang), 1), np.sum(wt * np.sin(ang), 1)], 1)

    edges = table.u
    cum = np.vstack([np.zeros(2), np.cumsum(increments(edges[:-1], edges[1:]), 0)])
    k = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(edges) - 2)
    out = cum[k] + increments(edges[k], u)
    return out + np.asarray(solution.problem.start.position)


def sample_trajectory(solution: Solution, dt: float, table: TimeTable | None = None) -> TrajectoryTable:
    """Rows at ``t = 0, dt, 2 dt, ...`` plus a final row at ``tau``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    table = table or time_map(solution)
    tau = table.tau
    k = int(math.floor(tau / dt * (1 + 1e-12)))
    t = dt * np.arange(k + 1)
    t = t[t <= tau * (1 + 1e-12)]
    if tau - t[-1] > 1e-9 * tau:
        t = np.append(t, tau)
    t[-1] = min(t[-1], tau)
    u = table.u_at(t)
    th, dth, _ = evaluate_field(solution.theta, u)
    v, dv, _ = evaluate_field(solution.speed, u)
    lam = solution.lam
    with np.errstate(invalid="ignore", divide="ignore"):
        a_t = v * dv / lam
    # at a zero-speed end v v' ~ u^(1/3) -> 0
    a_t = np.where(np.isfinite(a_t), a_t, 0.0)
    kappa = dth / lam
    a_n = v**2 * kappa
    omega = v * kappa
    xy = _positions(solution, table, u)
    return TrajectoryTable(t, xy[:, 0], xy[:, 1], th, v, a_t, a_n, kappa, omega)


def run_summary(solutions, best: int | None, wall_time: float) -> dict:
    """Per-variant status and costs of one run; ``best`` indexes ``solutions``."""
    out = {"best_variant": None if best is None else solutions[best].variant,
           "best_index": best, "wall_time": wall_time, "variants": []}
    for s in solutions:
        entry = {"variant": s.variant, "status": s.status, "iterations": s.iterations,
                 "objective": s.objective, "max_violation": s.max_violation}
        if s.converged:
            entry.update(cost_report(s).to_dict())
        out["variants"].append(entry)
    return out


def summary_document(solutions, best: int | None, wall_time: float) -> str:
    """:func:`run_summary` as JSON text."""
    return to_json(run_summary(solutions, best, wall_time))


def to_json(doc) -> str:
    """Strict JSON: non-finite floats become ``null``."""
    return json.dumps(_finite(doc), indent=2, default=_json_default, allow_nan=False)


def _finite(o):
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite(v) for v in o]
    if isinstance(o, (float, np.floating)):
        return float(o) if math.isfinite(o) else None
    return o


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)

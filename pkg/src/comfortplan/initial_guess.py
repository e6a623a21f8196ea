"""Warm starts: four path guesses and a matching speed guess per path.

Paths come from an auxiliary problem, minimize ``lam + w int theta''^2``
subject to the orientation and total-displacement conditions and the
curvature bound, started from arc-line-arc (Dubins CSC) seeds.  Speeds are
closed form when both ends are at rest and otherwise come from small
``int v''^2`` quadratic programs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PlanningProblem
from .fem import GAUSS12, FieldCoefficients, hermite_basis
from .solver import DenseNlp, SolverOptions, solve

TWO_PI = 2 * math.pi
VARIANTS = ("base_A", "base_B", "plus_2pi", "minus_2pi")
VARIANT_SHIFT = {"base_A": 0.0, "base_B": 0.0, "plus_2pi": TWO_PI, "minus_2pi": -TWO_PI}


@dataclass
class PathGuess:
    theta: FieldCoefficients
    lam: float
    variant: str
    iterations: int = 0
    status: str = "seed"


@dataclass
class SpeedGuess:
    speed: FieldCoefficients
    provenance: str


# ----------------------------------------------------------------- seeds
@dataclass(frozen=True)
class _Word:
    turns: tuple[int, int]  # +1 left, -1 right
    arcs: tuple[float, float]  # turned angles including extra loops (>= 0)
    straight: float
    radius: float

    @property
    def length(self) -> float:
        return self.radius * (self.arcs[0] + self.arcs[1]) + self.straight


def _centers(p, th, R, turn):
    return np.asarray(p) + turn * R * np.array([-math.sin(th), math.cos(th)])


def _mod(a):
    a = math.fmod(a, TWO_PI)
    if a < 0:
        a += TWO_PI
    return 0.0 if a > TWO_PI - 1e-10 else a


def _csc_words(p0, th0, p1, th1, R):
    """All arc-line-arc words between two poses (without extra loops)."""
    words = []
    for t0 in (1, -1):
        for t1 in (1, -1):
            c0 = _centers(p0, th0, R, t0)
            c1 = _centers(p1, th1, R, t1)
            d = c1 - c0
            D = math.hypot(*d)
            phi = math.atan2(d[1], d[0])
            if t0 == t1:
                psi, l = phi, D
            else:
                if D < 2 * R:
                    continue
                l = math.sqrt(max(D * D - 4 * R * R, 0.0))
                psi = phi + t0 * math.atan2(2 * R, l)
            a0 = _mod(t0 * (psi - th0))
            a1 = _mod(t1 * (th1 - psi))
            words.append(_Word((t0, t1), (a0, a1), l, R))
    return words


def _fit_heading(word: _Word, delta: float):
    """Add full loops so the unwrapped heading change equals ``delta``."""
    t0, t1 = word.turns
    h = t0 * word.arcs[0] + t1 * word.arcs[1]
    k = round((delta - h) / TWO_PI)
    if k == 0:
        return word
    # loops go on an arc turning in the needed direction
    need = 1 if k > 0 else -1
    arcs = list(word.arcs)
    for i, t in enumerate(word.turns):
        if t == need:
            arcs[i] += abs(k) * TWO_PI
            return _Word(word.turns, tuple(arcs), word.straight, word.radius)
    return None


def _theta_of_s(word: _Word, th0: float):
    R = word.radius
    s1 = R * word.arcs[0]
    s2 = s1 + word.straight
    t0, t1 = word.turns
    th_mid = th0 + t0 * word.arcs[0]

    def theta(s):
        s = np.asarray(s, dtype=float)
        return np.where(s <= s1, th0 + t0 * s / R,
                        np.where(s <= s2, th_mid, th_mid + t1 * (s - s2) / R))

    def dtheta(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < s1, t0 / R, np.where(s <= s2, 0.0, t1 / R))

    return theta, dtheta


def _word_for_variant(problem: PlanningProblem, variant: str, R: float):
    p0, p1 = problem.start.position, problem.end.position
    th0 = problem.start.orientation
    th1 = problem.end.orientation + VARIANT_SHIFT[variant]
    delta = th1 - th0
    cands = []
    for w in _csc_words(p0, th0, p1, th1, R):
        if variant == "base_A" and w.turns[0] != 1 and w.arcs[0] > 0:
            continue
        if variant == "base_B" and w.turns[0] != -1 and w.arcs[0] > 0:
            continue
        fw = _fit_heading(w, delta)
        if fw is not None:
            cands.append(fw)
    if not cands:
        return None
    return min(cands, key=lambda w: (round(w.length, 12), w.turns))


def path_guess_seed(problem: PlanningProblem, variant: str):
    """Arc-line-arc seed for ``variant``: ``(theta coefficients, lam)``.

    ``base_A`` starts with a left turn and ``base_B`` with a right turn
    (a degenerate zero-length first arc is allowed for either).  The
    ``plus_2pi``/``minus_2pi`` seeds reach the end orientation shifted by a
    full turn.  The turn radius is the minimum turn radius, halved until a
    word exists.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    R = problem.min_turn_radius
    word = None
    for _ in range(8):
        word = _word_for_variant(problem, variant, R)
        if word is not None:
            break
        R *= 0.5
    if word is None:  # pragma: no cover - a loop word always exists
        raise RuntimeError("no arc-line-arc seed found")
    lam = max(word.length, problem.chord_length)
    theta, dtheta = _theta_of_s(word, problem.start.orientation)
    u = np.arange(problem.n + 1) / problem.n
    vals = theta(u * word.length)
    slopes = dtheta(u * word.length) * word.length
    vals[-1] = problem.end.orientation + VARIANT_SHIFT[variant]
    return FieldCoefficients(np.stack([vals, slopes], 1)), float(lam)


# ------------------------------------------------------ auxiliary problem
class PathNlp:
    """``min lam + w int theta''^2`` with displacement and curvature conditions."""

    def __init__(self, problem: PlanningProblem, end_orientation: float):
        self.problem = problem
        n = problem.n
        self.nn = n
        h = 1.0 / n
        b = problem.bounds
        self.w = max(problem.chord_length, problem.min_turn_radius)
        self.delta = np.subtract(problem.end.position, problem.start.position)
        total = 2 * (n + 1) + 1
        self.lam_index = total - 1
        fixed = {0: problem.start.orientation, 2 * n: end_orientation}
        if problem.start.curvature == 0:
            fixed[1] = 0.0
        if problem.end.curvature == 0:
            fixed[2 * n + 1] = 0.0
        self.fixed = fixed
        self.free = np.array([k for k in range(total) if k not in fixed])
        self.total = total
        e = np.arange(n)
        self.elem = np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], 1)
        q = hermite_basis(GAUSS12.points, h)  # (12, 4, 3)
        self.Nq = q[..., 0]
        self.wq = GAUSS12.weights * h
        d2 = q[..., 2]
        Ke = np.einsum("q,qa,qb->ab", self.wq, d2, d2)
        K = np.zeros((total, total))
        for idx in self.elem:
            K[np.ix_(idx, idx)] += Ke
        self.K = K
        # curvature rows: theta'(u) - lam*kappa at P points per element
        P = problem.P
        xi = (np.arange(P) + 0.5) / P
        d1 = hermite_basis(xi, h)[..., 1]  # (P, 4)
        A = np.zeros((n * P, total))
        for i, idx in enumerate(self.elem):
            A[i * P:(i + 1) * P, idx] = d1
        A_hi = A.copy()
        A_hi[:, self.lam_index] = -b.curvature_max
        A_lo = A.copy()
        A_lo[:, self.lam_index] = -b.curvature_min
        self.curv_check = A
        rows = [A_hi, A_lo]
        lower = [np.full(n * P, -np.inf), np.zeros(n * P)]
        upper = [np.zeros(n * P), np.full(n * P, np.inf)]
        self.coupling = []
        for node, bc in ((0, problem.start), (n, problem.end)):
            if bc.curvature != 0:
                r = np.zeros(total)
                r[2 * node + 1] = 1.0
                r[self.lam_index] = -bc.curvature
                rows.append(r[None])
                lower.append(np.zeros(1))
                upper.append(np.zeros(1))
        self.A_lin = np.vstack(rows)
        self.g_lower = np.concatenate([np.zeros(2)] + lower)
        self.g_upper = np.concatenate([np.zeros(2)] + upper)
        self.m = len(self.g_lower)
        self.n = len(self.free)
        self.x_lower = np.full(self.n, -np.inf)
        self.x_upper = np.full(self.n, np.inf)
        self.x_lower[-1] = problem.chord_length * (1 - 1e-9)

    def expand(self, x):
        z = np.empty(self.total)
        z[self.free] = x
        for k, v in self.fixed.items():
            z[k] = v
        return z

    def pack(self, theta: FieldCoefficients, lam: float):
        z = np.append(theta.values.ravel(), lam)
        return z[self.free]

    def _theta_q(self, z):
        return np.einsum("qk,ek->eq", self.Nq, z[self.elem])

    def objective(self, x):
        z = self.expand(x)
        return float(z[-1] + self.w * z @ self.K @ z)

    def gradient(self, x):
        z = self.expand(x)
        g = 2 * self.w * self.K @ z
        g[-1] += 1.0
        return g[self.free]

    def constraints(self, x):
        z = self.expand(x)
        th = self._theta_q(z)
        lam = z[-1]
        gx = lam * np.sum(self.wq * np.cos(th)) - self.delta[0]
        gy = lam * np.sum(self.wq * np.sin(th)) - self.delta[1]
        return np.concatenate([[gx, gy], self.A_lin @ z])

    def _jac_full(self, z):
        th = self._theta_q(z)
        lam = z[-1]
        c, s = np.cos(th), np.sin(th)
        J = np.zeros((2, self.total))
        for e, idx in enumerate(self.elem):
            J[0, idx] += -lam * (self.wq * s[e]) @ self.Nq
            J[1, idx] += lam * (self.wq * c[e]) @ self.Nq
        J[0, -1] = np.sum(self.wq * c)
        J[1, -1] = np.sum(self.wq * s)
        return np.vstack([J, self.A_lin])

    def jacobian(self, x):
        return self._jac_full(self.expand(x))[:, self.free]

    def hessian(self, x, obj_factor, lagrange):
        z = self.expand(x)
        th = self._theta_q(z)
        lam = z[-1]
        c, s = np.cos(th), np.sin(th)
        yx, yy = lagrange[0], lagrange[1]
        H = obj_factor * 2 * self.w * self.K.copy()
        for e, idx in enumerate(self.elem):
            a = self.wq * (-yx * c[e] - yy * s[e]) * lam
            H[np.ix_(idx, idx)] += np.einsum("q,qk,ql->kl", a, self.Nq, self.Nq)
            b = (self.wq * (-yx * s[e] + yy * c[e])) @ self.Nq
            H[idx, -1] += b
            H[-1, idx] += b
        H = H[np.ix_(self.free, self.free)]
        return np.tril(H)

    def variable_locations(self):
        loc = np.append(np.repeat(np.arange(self.nn + 1) / self.nn, 2), 2.0)
        return loc[self.free]

    def constraint_locations(self):
        return np.zeros(self.m)


def _solve_path(problem, variant, max_iterations):
    theta0, lam0 = path_guess_seed(problem, variant)
    end = problem.end.orientation + VARIANT_SHIFT[variant]
    nlp = PathNlp(problem, end)
    rep = solve(nlp, nlp.pack(theta0, lam0), SolverOptions(max_iterations=max_iterations))
    z = nlp.expand(rep.x)
    th = FieldCoefficients(z[:-1].reshape(-1, 2).copy())
    return PathGuess(th, float(z[-1]), variant, rep.iterations, rep.status)


def path_guess_all(problem: PlanningProblem, variants=VARIANTS, max_iterations: int = 100):
    """Solve the auxiliary path problem for each variant; failures are dropped."""
    out = []
    for v in variants:
        g = _solve_path(problem, v, max_iterations)
        if g.status == "converged":
            out.append(g)
    return out


# ------------------------------------------------------------- speeds
def _hermite_qp(n, lam, P, fixed, lower_fn, upper_fn, offset=None, dlower=None, dupper=None):
    """``min int v''^2`` over Hermite coefficients with pointwise bounds.

    ``fixed`` maps full coefficient indices to values; the bounds apply to
    ``offset(u) + v(u)`` at ``P`` points per element, and optionally to
    ``v'(u)`` through ``dlower``/``dupper``.
    """
    h = 1.0 / n
    total = 2 * (n + 1)
    e = np.arange(n)
    elem = np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], 1)
    q = hermite_basis(GAUSS12.points, h)
    wq = GAUSS12.weights * h
    Ke = np.einsum("q,qa,qb->ab", wq, q[..., 2], q[..., 2])
    K = np.zeros((total, total))
    for idx in elem:
        K[np.ix_(idx, idx)] += Ke
    xi = (np.arange(P) + 0.5) / P
    bp = hermite_basis(xi, h)
    A = np.zeros((n * P, total))
    Ad = np.zeros((n * P, total))
    for i, idx in enumerate(elem):
        A[i * P:(i + 1) * P, idx] = bp[..., 0]
        Ad[i * P:(i + 1) * P, idx] = bp[..., 1]
    u = ((e[:, None] + xi[None, :]) * h).ravel()
    off = offset(u) if offset is not None else np.zeros_like(u)
    rows, lo, hi = [A], [lower_fn(u) - off], [upper_fn(u) - off]
    if dlower is not None:
        rows.append(Ad)
        lo.append(np.full(len(u), dlower))
        hi.append(np.full(len(u), dupper))
    G = np.vstack(rows)
    free = np.array([k for k in range(total) if k not in fixed])
    zf = np.zeros(total)
    for k, v in fixed.items():
        zf[k] = v
    Gf = G[:, free]
    gconst = G @ zf
    Kf = K[np.ix_(free, free)]
    kc = K[free] @ zf
    nlp = DenseNlp(
        lambda x: float(x @ Kf @ x + 2 * kc @ x),
        lambda x: 2 * Kf @ x + 2 * kc,
        lambda x, a, l: 2 * a * Kf,
        np.full(len(free), -np.inf), np.full(len(free), np.inf),
        g=lambda x: Gf @ x + gconst, jac=lambda x: Gf,
        g_lower=np.concatenate(lo), g_upper=np.concatenate(hi),
    )
    # start from the linear interpolant of the fixed end values
    x0 = np.zeros(len(free))
    rep = solve(nlp, x0, SolverOptions(max_iterations=200))
    z = zf.copy()
    z[free] = rep.x
    return z.reshape(-1, 2), rep


def _rest_to_rest_coefficients(n, vmax):
    u = np.arange(n + 1) / n
    q = 4 * u * (1 - u)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = vmax * q ** (2 / 3)
        slopes = vmax * (2 / 3) * q ** (-1 / 3) * 4 * (1 - 2 * u)
    amp = vmax * (4.0 / n) ** (2 / 3)
    vals[0] = vals[-1] = 0.0
    slopes[0], slopes[-1] = amp, amp
    return np.stack([vals, slopes], 1)


def speed_guess(problem: PlanningProblem, g: PathGuess) -> SpeedGuess:
    """Speed warm start consistent with the endpoint speeds of ``problem``."""
    n, P = problem.n, problem.P
    vmax = problem.bounds.speed_max
    v0, v1 = problem.start.speed, problem.end.speed
    a0, a1 = problem.start.tangential_acceleration, problem.end.tangential_acceleration
    lam = g.lam
    if v0 == 0 and v1 == 0:
        return SpeedGuess(FieldCoefficients(_rest_to_rest_coefficients(n, vmax), True, True),
                          "closed_form")
    if v0 == 0 or v1 == 0:
        right_zero = v1 == 0
        K = (16 / 9) * 2 ** (1 / 3) * vmax

        def sing(u):
            return K * u**2 * (1 - u) ** (2 / 3) if right_zero else K * (1 - u) ** 2 * u ** (2 / 3)

        def dsing(u):
            with np.errstate(divide="ignore", invalid="ignore"):
                if right_zero:
                    return K * (2 * u * (1 - u) ** (2 / 3) - (2 / 3) * u**2 * (1 - u) ** (-1 / 3))
                return -K * (2 * (1 - u) * u ** (2 / 3) - (2 / 3) * (1 - u) ** 2 * u ** (-1 / 3))

        if right_zero:
            fixed = {0: v0, 1: a0 * lam / v0, 2 * n: 0.0}
        else:
            fixed = {2 * n: v1, 2 * n + 1: a1 * lam / v1, 0: 0.0}
        coef, _ = _hermite_qp(n, lam, P, fixed, lambda u: np.zeros_like(u),
                              lambda u: np.full_like(u, vmax), offset=sing)
        u = np.arange(n + 1) / n
        coef[:, 0] += sing(u)
        d = dsing(u)
        h = 1.0 / n
        if right_zero:
            coef[1:-1, 1] += d[1:-1]
            coef[-1] = (0.0, K * h ** (2 / 3))
            coef[0, 1] += d[0]
        else:
            coef[1:-1, 1] += d[1:-1]
            coef[0] = (0.0, K * h ** (2 / 3))
            coef[-1, 1] += d[-1]
        return SpeedGuess(FieldCoefficients(coef, not right_zero, right_zero), "optimized")
    vmin = min(v0, v1)
    b = problem.bounds
    fixed = {0: v0, 1: a0 * lam / v0, 2 * n: v1, 2 * n + 1: a1 * lam / v1}
    coef, _ = _hermite_qp(
        n, lam, P, fixed, lambda u: np.full_like(u, vmin / 2), lambda u: np.full_like(u, vmax),
        dlower=10 * b.tangential_accel_min * lam / vmin,
        dupper=10 * b.tangential_accel_max * lam / vmin,
    )
    return SpeedGuess(FieldCoefficients(coef), "optimized")

"""Domain types and pointwise kinematics in the scaled arc-length domain.

A trajectory is described by its length ``lam``, the speed ``v(u)`` and the
orientation ``theta(u)`` for ``u`` in ``[0, 1]``.  Primes denote derivatives
with respect to ``u``.  All functions here accept scalars or numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class NonFiniteIntegrand(FloatingPointError):
    """Raised when the time integrand is evaluated where the speed is not positive."""


@dataclass(frozen=True)
class BoundaryState:
    position: tuple[float, float]
    orientation: float
    curvature: float = 0.0
    speed: float = 0.0
    tangential_acceleration: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", (float(self.position[0]), float(self.position[1])))
        if self.speed < 0:
            raise ValueError(f"speed must be >= 0, got {self.speed}")
        if self.speed == 0 and self.tangential_acceleration != 0:
            raise ValueError(
                "a zero-speed boundary state must have zero tangential acceleration"
            )


@dataclass(frozen=True)
class DynamicBounds:
    """Box bounds on the dynamic quantities; defaults are the wheelchair values."""

    curvature_min: float = -1.8
    curvature_max: float = 1.8
    speed_min: float = 0.0
    speed_max: float = 3.0
    angular_speed_min: float = -1.57
    angular_speed_max: float = 1.57
    tangential_accel_min: float = -1.0
    tangential_accel_max: float = 1.0
    normal_accel_min: float = -1.0
    normal_accel_max: float = 1.0

    def __post_init__(self):
        for name in ("curvature", "speed", "angular_speed", "tangential_accel", "normal_accel"):
            lo, hi = getattr(self, name + "_min"), getattr(self, name + "_max")
            if lo > hi:
                raise ValueError(f"{name}: min {lo} exceeds max {hi}")
        if self.speed_min != 0:
            raise ValueError("speed_min must be 0")
        if self.speed_max <= 0:
            raise ValueError("speed_max must be positive")

    def scaled(self, length_factor: float) -> "DynamicBounds":
        """Bounds expressed in a length unit ``length_factor`` times smaller."""
        c = float(length_factor)
        return DynamicBounds(
            self.curvature_min / c, self.curvature_max / c,
            self.speed_min * c, self.speed_max * c,
            self.angular_speed_min, self.angular_speed_max,
            self.tangential_accel_min * c, self.tangential_accel_max * c,
            self.normal_accel_min * c, self.normal_accel_max * c,
        )


@dataclass(frozen=True)
class WeightFactors:
    f_T: float = 1.0
    f_N: float = 1.0

    def __post_init__(self):
        if not (self.f_T > 0 and self.f_N > 0):
            raise ValueError("weight factors must be strictly positive")


@dataclass(frozen=True)
class PlanningProblem:
    """Everything needed to pose one discomfort minimization problem.

    ``impose_bounds=False`` drops the dynamic-bound rows (the unconstrained
    variant used for weight sweeps).  ``weights_override`` pins the effective
    weights ``(w_T, w_N)`` instead of deriving them from the base weight.
    """

    start: BoundaryState
    end: BoundaryState
    bounds: DynamicBounds = field(default_factory=DynamicBounds)
    weights: WeightFactors = field(default_factory=WeightFactors)
    obstacles: Sequence = ()
    n: int = 32
    M: int = 20
    P: int = 12
    min_turn_radius: float = 0.55
    impose_bounds: bool = True
    weights_override: tuple[float, float] | None = None

    def __post_init__(self):
        if self.n < 2 or self.M < 1 or self.P < 1:
            raise ValueError("need n >= 2, M >= 1, P >= 1")
        if self.min_turn_radius <= 0:
            raise ValueError("min_turn_radius must be positive")
        if self.chord_length == 0:
            raise ValueError("start and end positions coincide")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    @property
    def chord_length(self) -> float:
        (x0, y0), (x1, y1) = self.start.position, self.end.position
        return math.hypot(x1 - x0, y1 - y0)


@dataclass(frozen=True)
class KinematicSample:
    u: float
    v: float
    dv: float
    ddv: float
    theta: float
    dtheta: float
    ddtheta: float
    lam: float


def tangential_acceleration(s: KinematicSample):
    return s.v * s.dv / s.lam


def normal_acceleration(s: KinematicSample):
    return s.v**2 * s.dtheta / s.lam


def tangential_jerk(s: KinematicSample):
    return s.v / s.lam**2 * (s.dv**2 + s.v * s.ddv - s.v**2 * s.dtheta**2)


def normal_jerk(s: KinematicSample):
    return s.v**2 / s.lam**2 * (3 * s.dv * s.dtheta + s.v * s.ddtheta)


def curvature(s: KinematicSample):
    return s.dtheta / s.lam


def angular_speed(s: KinematicSample):
    return s.dtheta * s.v / s.lam


def position_increment(theta: Callable, lam: float, u_a: float = 0.0, u_b: float = 1.0,
                       panels: int = 1) -> np.ndarray:
    """``lam * (int cos(theta), int sin(theta))`` over ``[u_a, u_b]``.

    Uses the 12-point Gauss rule on ``panels`` equal sub-intervals; ``theta``
    must accept an array of ``u`` values.
    """
    from .fem import GAUSS12

    edges = np.linspace(u_a, u_b, panels + 1)
    width = np.diff(edges)
    u = edges[:-1, None] + width[:, None] * GAUSS12.points[None, :]
    w = width[:, None] * GAUSS12.weights[None, :]
    th = np.asarray(theta(u.ravel()), dtype=float).reshape(u.shape)
    return lam * np.array([np.sum(w * np.cos(th)), np.sum(w * np.sin(th))])


def discomfort_integrands(s: KinematicSample, w_T: float, w_N: float):
    """Return ``(time, weighted tangential jerk, weighted normal jerk)`` integrands."""
    if not s.v > 0:
        raise NonFiniteIntegrand(f"speed {s.v} is not positive at u={s.u}")
    lam3 = s.lam**3
    a = s.dv**2 + s.v * s.ddv - s.v**2 * s.dtheta**2
    b = 3 * s.dv * s.dtheta + s.v * s.ddtheta
    return (s.lam / s.v, w_T * s.v / lam3 * a * a, w_N * s.v**3 / lam3 * b * b)


def integrand_values(v, dv, ddv, dth, ddth, lam):
    """Time and unweighted jerk integrands, without derivatives."""
    A = dv * dv + v * ddv - v * v * dth * dth
    B = 3 * dv * dth + v * ddth
    il3 = 1.0 / lam**3
    return lam / v, v * il3 * A * A, v**3 * il3 * B * B


# Pointwise variable order used by the derivative kernels below.
V, DV, DDV, DTH, DDTH, LAM = range(6)


def _product_square(c, dc, d2c, p, dp, d2p):
    """Value, gradient and Hessian of ``c * p**2`` from those of ``c`` and ``p``."""
    val = c * p * p
    grad = (p * p)[..., None] * dc + (2 * c * p)[..., None] * dp
    outer = dc[..., :, None] * dp[..., None, :]
    hess = (
        (p * p)[..., None, None] * d2c
        + (2 * p)[..., None, None] * (outer + np.swapaxes(outer, -1, -2))
        + (2 * c)[..., None, None] * (dp[..., :, None] * dp[..., None, :] + p[..., None, None] * d2p)
    )
    return val, grad, hess


def integrand_derivatives(v, dv, ddv, dth, ddth, lam):
    """Time, tangential and normal jerk integrands with derivatives.

    Arguments are broadcastable arrays.  Returns three ``(value, grad, hess)``
    triples where ``grad`` has a trailing axis of 6 and ``hess`` trailing
    axes ``(6, 6)`` in the order ``(v, v', v'', theta', theta'', lam)``.
    The jerk integrands are unweighted.
    """
    v, dv, ddv, dth, ddth, lam = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (v, dv, ddv, dth, ddth, lam))
    )
    shape = v.shape
    zeros_g = np.zeros(shape + (6,))
    zeros_h = np.zeros(shape + (6, 6))
    inv_v = 1.0 / v
    inv_l = 1.0 / lam

    t_val = lam * inv_v
    t_grad = zeros_g.copy()
    t_grad[..., V] = -lam * inv_v**2
    t_grad[..., LAM] = inv_v
    t_hess = zeros_h.copy()
    t_hess[..., V, V] = 2 * lam * inv_v**3
    t_hess[..., V, LAM] = t_hess[..., LAM, V] = -(inv_v**2)

    # tangential: (v / lam^3) * A^2, A = v'^2 + v v'' - v^2 theta'^2
    A = dv * dv + v * ddv - v * v * dth * dth
    dA = zeros_g.copy()
    dA[..., V] = ddv - 2 * v * dth * dth
    dA[..., DV] = 2 * dv
    dA[..., DDV] = v
    dA[..., DTH] = -2 * v * v * dth
    d2A = zeros_h.copy()
    d2A[..., V, V] = -2 * dth * dth
    d2A[..., V, DDV] = d2A[..., DDV, V] = 1.0
    d2A[..., V, DTH] = d2A[..., DTH, V] = -4 * v * dth
    d2A[..., DV, DV] = 2.0
    d2A[..., DTH, DTH] = -2 * v * v
    cT = v * inv_l**3
    dcT = zeros_g.copy()
    dcT[..., V] = inv_l**3
    dcT[..., LAM] = -3 * v * inv_l**4
    d2cT = zeros_h.copy()
    d2cT[..., V, LAM] = d2cT[..., LAM, V] = -3 * inv_l**4
    d2cT[..., LAM, LAM] = 12 * v * inv_l**5
    jt = _product_square(cT, dcT, d2cT, A, dA, d2A)

    # normal: (v^3 / lam^3) * B^2, B = 3 v' theta' + v theta''
    B = 3 * dv * dth + v * ddth
    dB = zeros_g.copy()
    dB[..., V] = ddth
    dB[..., DV] = 3 * dth
    dB[..., DTH] = 3 * dv
    dB[..., DDTH] = v
    d2B = zeros_h.copy()
    d2B[..., V, DDTH] = d2B[..., DDTH, V] = 1.0
    d2B[..., DV, DTH] = d2B[..., DTH, DV] = 3.0
    cN = v**3 * inv_l**3
    dcN = zeros_g.copy()
    dcN[..., V] = 3 * v * v * inv_l**3
    dcN[..., LAM] = -3 * v**3 * inv_l**4
    d2cN = zeros_h.copy()
    d2cN[..., V, V] = 6 * v * inv_l**3
    d2cN[..., V, LAM] = d2cN[..., LAM, V] = -9 * v * v * inv_l**4
    d2cN[..., LAM, LAM] = 12 * v**3 * inv_l**5
    jn = _product_square(cN, dcN, d2cN, B, dB, d2B)

    return (t_val, t_grad, t_hess), jt, jn

"""Dimensional analysis of the jerk weights."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import PlanningProblem, WeightFactors

QUINTIC_CONSTANT = (225.0 / 2048.0) ** 2


@dataclass(frozen=True)
class CharacteristicScales:
    L_star: float
    V_star: float

    def __post_init__(self):
        if not (self.L_star > 0 and self.V_star > 0):
            raise ValueError("characteristic scales must be positive")


@dataclass(frozen=True)
class EffectiveWeights:
    w_T: float
    w_N: float

    def __post_init__(self):
        if self.w_T < 0 or self.w_N < 0:
            raise ValueError("effective weights must be nonnegative")


def characteristic_scales(delta_L: float, R_star: float, V_max: float) -> CharacteristicScales:
    if delta_L <= 0 or R_star <= 0 or V_max <= 0:
        raise ValueError("delta_L, R_star and V_max must all be positive")
    return CharacteristicScales(max(delta_L, math.pi * R_star), V_max)


def base_weight(scales: CharacteristicScales) -> float:
    """Base weight (s^6/m^2) shared by the tangential and normal jerk terms."""
    return QUINTIC_CONSTANT * scales.L_star**4 / scales.V_star**6


def effective_weights(f: WeightFactors, base: float) -> EffectiveWeights:
    if base < 0:
        raise ValueError("base weight must be nonnegative")
    return EffectiveWeights(f.f_T * base, f.f_N * base)


def problem_weights(problem: PlanningProblem) -> EffectiveWeights:
    if problem.weights_override is not None:
        return EffectiveWeights(*problem.weights_override)
    scales = characteristic_scales(
        problem.chord_length, problem.min_turn_radius, problem.bounds.speed_max
    )
    return effective_weights(problem.weights, base_weight(scales))


@dataclass(frozen=True)
class QuinticReference:
    """Rest-to-rest quintic along a line of length ``L`` taking time ``tau``."""

    L: float
    tau: float
    w_T: float

    def position(self, t):
        t = np.asarray(t, dtype=float)
        L, tau = self.L, self.tau
        return L * t**3 / tau**5 * (6 * t**2 - 15 * t * tau + 10 * tau**2)

    def speed(self, t):
        t = np.asarray(t, dtype=float)
        return 30 * self.L * t**2 * (self.tau - t) ** 2 / self.tau**5

    def acceleration(self, t):
        t = np.asarray(t, dtype=float)
        L, tau = self.L, self.tau
        return 60 * L * t * (tau - t) * (tau - 2 * t) / tau**5

    def jerk(self, t):
        t = np.asarray(t, dtype=float)
        L, tau = self.L, self.tau
        return 60 * L * (tau**2 - 6 * tau * t + 6 * t**2) / tau**5

    @property
    def max_speed(self) -> float:
        return float(self.speed(self.tau / 2))

    def discomfort(self, tau: float | None = None) -> float:
        tau = self.tau if tau is None else tau
        return tau + 720 * self.L**2 * self.w_T / tau**5


def quintic_reference(L: float, V: float) -> QuinticReference:
    """Closed-form 1-D reference used to calibrate the base weight."""
    if L <= 0 or V <= 0:
        raise ValueError("L and V must be positive")
    w_T = base_weight(CharacteristicScales(L, V))
    tau = (3600 * L**2 * w_T) ** (1.0 / 6.0)
    return QuinticReference(L, tau, w_T)

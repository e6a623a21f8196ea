"""Star-shaped obstacles described by a periodic radial function.

An obstacle is a center ``c`` and a radial function ``rho(phi)`` giving the
boundary distance along the ray at angle ``phi``.  The clearance
``C(r) = |r - c| - rho(atan2(r - c))`` is nonnegative exactly outside.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

TWO_PI = 2 * math.pi


class CenterCoincidence(ValueError):
    """The query point sits exactly on the obstacle center."""


@dataclass(frozen=True)
class Circle:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("circle radius must be positive")


@dataclass(frozen=True)
class Ellipse:
    semi_axis_a: float
    semi_axis_b: float
    rotation: float = 0.0

    def __post_init__(self):
        if self.semi_axis_a <= 0 or self.semi_axis_b <= 0:
            raise ValueError("ellipse semi-axes must be positive")


@dataclass(frozen=True)
class Rectangle:
    half_width: float
    half_height: float
    rotation: float = 0.0
    smoothing: float = math.radians(2.0)

    def __post_init__(self):
        if self.half_width <= 0 or self.half_height <= 0:
            raise ValueError("rectangle half sizes must be positive")


@dataclass(frozen=True)
class StarPolygon:
    """Polygon given by vertex radii and angles around its center."""

    radii: tuple[float, ...]
    angles: tuple[float, ...]
    smoothing: float = math.radians(2.0)

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if len(self.radii) != len(self.angles) or len(self.radii) < 3:
            raise ValueError("need at least three vertices with matching radii and angles")
        if min(self.radii) <= 0:
            raise ValueError("vertex radii must be positive")
        a = np.asarray(self.angles)
        gaps = np.diff(np.append(a, a[0] + TWO_PI))
        if np.any(np.diff(a) <= 0) or a[-1] - a[0] >= TWO_PI:
            raise ValueError("vertex angles must be strictly increasing within one turn")
        if np.any(gaps >= math.pi):
            raise ValueError("polygon is not star-shaped about its center (angular gap >= pi)")


ShapeSpec = Circle | Ellipse | Rectangle | StarPolygon


@dataclass(frozen=True)
class StarObstacle:
    center: tuple[float, float]
    radial: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]
    corner_angles: tuple[float, ...] = ()
    spec: object = None

    def rho(self, phi):
        return self.radial(np.asarray(phi, dtype=float))


def _wrap(phi):
    return np.mod(phi, TWO_PI)


def _circle_radial(radius):
    def radial(phi):
        phi = np.asarray(phi, dtype=float)
        return np.full(phi.shape, radius), np.zeros(phi.shape), np.zeros(phi.shape)
    return radial


def _ellipse_radial(a, b, rotation):
    ab = a * b
    d = a * a - b * b

    def radial(phi):
        psi = np.asarray(phi, dtype=float) - rotation
        q = b * b + d * np.sin(psi) ** 2
        dq = d * np.sin(2 * psi)
        d2q = 2 * d * np.cos(2 * psi)
        rho = ab * q**-0.5
        drho = -0.5 * ab * q**-1.5 * dq
        d2rho = ab * (0.75 * q**-2.5 * dq * dq - 0.5 * q**-1.5 * d2q)
        return rho, drho, d2rho
    return radial


def _smoothstep(t):
    """Quintic blend with matching first and second derivatives at both ends."""
    s = t * t * t * (10 - 15 * t + 6 * t * t)
    ds = 30 * t * t * (1 - t) ** 2
    d2s = 60 * t * (1 - t) * (1 - 2 * t)
    return s, ds, d2s


def _polygon_radial(vertices: np.ndarray, smoothing: float):
    """Radial function of a polygon star-shaped about the origin.

    Vertices are ordered counterclockwise.  Within ``smoothing`` radians of a
    vertex the two adjacent edge functions are blended with a C2 smoothstep.
    With ``smoothing == 0`` the exact piecewise function is returned and a
    vertex angle takes the edge on its counterclockwise side.
    """
    vertices = np.asarray(vertices, dtype=float)
    k = len(vertices)
    ang = _wrap(np.arctan2(vertices[:, 1], vertices[:, 0]))
    order = np.argsort(ang)
    vertices, ang = vertices[order], ang[order]
    nxt = np.roll(vertices, -1, axis=0)
    edge = nxt - vertices
    normal = np.stack([edge[:, 1], -edge[:, 0]], axis=1)
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    dist = np.einsum("ij,ij->i", vertices, normal)
    if np.any(dist <= 0):
        raise ValueError("polygon is not star-shaped about its center")
    beta = np.arctan2(normal[:, 1], normal[:, 0])
    if smoothing > 0:
        gaps = np.diff(np.append(ang, ang[0] + TWO_PI))
        if smoothing >= 0.5 * gaps.min():
            raise ValueError("corner smoothing window overlaps the next corner")

    def edge_eval(i, phi):
        c = phi - beta[i]
        tan = np.tan(c)
        rho = dist[i] / np.cos(c)
        return rho, rho * tan, rho * (2 * tan * tan + 1)

    def radial(phi):
        phi = _wrap(np.asarray(phi, dtype=float))
        shape = phi.shape
        phi = phi.ravel()
        # edge i covers [ang[i], ang[i+1]); angles below ang[0] belong to the last edge
        idx = np.searchsorted(ang, phi, side="right") - 1
        idx[idx < 0] = k - 1
        rho, drho, d2rho = edge_eval(idx, phi)
        if smoothing > 0:
            # signed offset from the nearest vertex, in (-pi, pi]
            for j in range(k):
                off = np.mod(phi - ang[j] + math.pi, TWO_PI) - math.pi
                sel = np.abs(off) < smoothing
                if not np.any(sel):
                    continue
                p = phi[sel]
                left = edge_eval(np.full(p.shape, (j - 1) % k), p)
                right = edge_eval(np.full(p.shape, j), p)
                t = (off[sel] + smoothing) / (2 * smoothing)
                s, ds, d2s = _smoothstep(t)
                ds, d2s = ds / (2 * smoothing), d2s / (2 * smoothing) ** 2
                diff = [r - l for l, r in zip(left, right)]
                rho[sel] = left[0] + s * diff[0]
                drho[sel] = left[1] + s * diff[1] + ds * diff[0]
                d2rho[sel] = left[2] + s * diff[2] + 2 * ds * diff[1] + d2s * diff[0]
        return rho.reshape(shape), drho.reshape(shape), d2rho.reshape(shape)

    return radial, tuple(ang)


def make_obstacle(spec, center: Sequence[float]) -> StarObstacle:
    center = (float(center[0]), float(center[1]))
    if isinstance(spec, Circle):
        return StarObstacle(center, _circle_radial(spec.radius), (), spec)
    if isinstance(spec, Ellipse):
        return StarObstacle(
            center, _ellipse_radial(spec.semi_axis_a, spec.semi_axis_b, spec.rotation), (), spec
        )
    if isinstance(spec, Rectangle):
        hw, hh = spec.half_width, spec.half_height
        c, s = math.cos(spec.rotation), math.sin(spec.rotation)
        local = np.array([[hw, hh], [-hw, hh], [-hw, -hh], [hw, -hh]])
        rot = np.array([[c, -s], [s, c]])
        radial, corners = _polygon_radial(local @ rot.T, spec.smoothing)
        return StarObstacle(center, radial, corners, spec)
    if isinstance(spec, StarPolygon):
        r = np.asarray(spec.radii)
        a = np.asarray(spec.angles)
        radial, corners = _polygon_radial(np.stack([r * np.cos(a), r * np.sin(a)], 1), spec.smoothing)
        return StarObstacle(center, radial, corners, spec)
    raise TypeError(f"unknown shape spec {spec!r}")


def _offsets(o: StarObstacle, r):
    r = np.asarray(r, dtype=float)
    x = r[..., 0] - o.center[0]
    y = r[..., 1] - o.center[1]
    return x, y


def clearance(o: StarObstacle, r):
    x, y = _offsets(o, r)
    dist = np.hypot(x, y)
    if np.any(dist == 0):
        raise CenterCoincidence("clearance queried at the obstacle center")
    rho, _, _ = o.rho(np.arctan2(y, x))
    out = dist - rho
    return float(out) if np.ndim(out) == 0 else out


def clearance_derivatives(o: StarObstacle, r):
    """Clearance, gradient ``(..., 2)`` and Hessian ``(..., 2, 2)`` at points ``r``."""
    x, y = _offsets(o, r)
    R2 = x * x + y * y
    if np.any(R2 == 0):
        raise CenterCoincidence("clearance queried at the obstacle center")
    R = np.sqrt(R2)
    rho, drho, d2rho = o.rho(np.arctan2(y, x))
    val = R - rho
    grad = np.stack([x / R + drho * y / R2, y / R - drho * x / R2], axis=-1)
    a = (1.0 - d2rho / R) / (R2 * R)
    b = drho / (R2 * R2)
    hxx = a * y * y - b * 2 * x * y
    hxy = -a * x * y - b * (y * y - x * x)
    hyy = a * x * x + b * 2 * x * y
    hess = np.stack([np.stack([hxx, hxy], -1), np.stack([hxy, hyy], -1)], -2)
    return val, grad, hess


def clearance_gradient(o: StarObstacle, r):
    return clearance_derivatives(o, r)[1]


def clearance_hessian(o: StarObstacle, r):
    return clearance_derivatives(o, r)[2]

"""Conforming finite elements for the speed and orientation fields.

Both fields use cubic Hermite elements on a uniform mesh of ``[0, 1]``, with
nodal unknowns ``(f_i, f'_i)``.  At a zero-speed end the speed uses a
singular boundary element whose modes are ``{S, H3, H4}`` with ``S ~ xi^(2/3)``
(mirrored at the right end).  The singular amplitude lives in the slot of
the boundary node's derivative unknown; the boundary value is zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SINGULAR_EXPONENT = 2.0 / 3.0


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on the reference interval ``[0, 1]``."""

    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def gauss_legendre(cls, npts: int = 12) -> "QuadratureRule":
        x, w = np.polynomial.legendre.leggauss(npts)
        return cls(0.5 * (x + 1.0), 0.5 * w)

    def integrate(self, f, a: float = 0.0, b: float = 1.0) -> float:
        return float((b - a) * np.sum(self.weights * f(a + (b - a) * self.points)))


GAUSS12 = QuadratureRule.gauss_legendre(12)


@dataclass(frozen=True)
class Mesh:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("mesh needs at least one element")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n + 1) / self.n

    def locate(self, u):
        """Element index and local coordinate; an element owns its right end."""
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        e = np.clip(np.ceil(u * self.n) - 1, 0, self.n - 1).astype(int)
        return e, u * self.n - e


def hermite_basis(xi, h: float = 1.0) -> np.ndarray:
    """Cubic Hermite shapes at ``xi``: array ``(..., 4, 3)`` of value, d/du, d2/du2.

    Shape order is value-left, slope-left, value-right, slope-right, where the
    slope shapes are scaled by ``h`` so coefficients are u-derivatives.
    """
    x = np.asarray(xi, dtype=float)
    x2, x3 = x * x, x * x * x
    val = np.stack([1 - 3 * x2 + 2 * x3, h * (x - 2 * x2 + x3), 3 * x2 - 2 * x3, h * (x3 - x2)], -1)
    d1 = np.stack([(-6 * x + 6 * x2) / h, 1 - 4 * x + 3 * x2, (6 * x - 6 * x2) / h, 3 * x2 - 2 * x], -1)
    d2 = np.stack([(-6 + 12 * x) / h**2, (-4 + 6 * x) / h, (6 - 12 * x) / h**2, (6 * x - 2) / h], -1)
    return np.stack([val, d1, d2], -1)


def singular_mode(t):
    """``S(t) = t^(2/3) - (7/3) t^2 + (4/3) t^3`` and its first two t-derivatives (t > 0).

    ``S`` is ``t^(2/3)`` minus its cubic Hermite interpolant at ``t = 1``, so
    ``S(1) = S'(1) = 0`` and the element spans ``{t^(2/3), t^2, t^3}``; a
    pure ``c u^(2/3)`` speed is reproduced exactly.
    """
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = t ** SINGULAR_EXPONENT
        val = p - (7.0 / 3.0) * t**2 + (4.0 / 3.0) * t**3
        d1 = (2.0 / 3.0) * p / t - (14.0 / 3.0) * t + 4.0 * t**2
        d2 = -(2.0 / 9.0) * p / t**2 - 14.0 / 3.0 + 8.0 * t
    at_end = t == 0
    if np.any(at_end):
        val = np.where(at_end, 0.0, val)
        d1 = np.where(at_end, np.inf, d1)
        d2 = np.where(at_end, -np.inf, d2)
    return val, d1, d2


def singular_basis(xi, h: float = 1.0, side: str = "left") -> np.ndarray:
    """Speed basis on a zero-speed boundary element, laid out like :func:`hermite_basis`.

    For ``side='left'`` the slots are ``(0, S, H3, H4)`` with
    ``S`` from :func:`singular_mode`; for ``side='right'`` they are
    ``(H1, H2, 0, S(1 - xi))``.  The singular amplitude multiplies ``S``
    directly, so ``v ~ c xi^(2/3)`` near the singular end.  At the singular
    end the derivative entries are infinite.
    """
    base = hermite_basis(xi, h)
    x = np.asarray(xi, dtype=float)
    if side == "left":
        val, d1, d2 = singular_mode(x)
        base[..., 0, :] = 0.0
        base[..., 1, 0], base[..., 1, 1], base[..., 1, 2] = val, d1 / h, d2 / h**2
    elif side == "right":
        val, d1, d2 = singular_mode(1.0 - x)
        base[..., 2, :] = 0.0
        base[..., 3, 0], base[..., 3, 1], base[..., 3, 2] = val, -d1 / h, d2 / h**2
    else:
        raise ValueError("side must be 'left' or 'right'")
    return base


def element_quadrature(n: int, singular_left: bool = False, singular_right: bool = False,
                       rule: QuadratureRule = GAUSS12):
    """Per-element reference points and weights (including the factor ``h``).

    On a singular element the rule is applied after the substitution
    ``xi = s^3`` (``xi = 1 - s^3`` on the right), which makes the time and
    jerk integrands bounded and smooth in ``s``.
    """
    h = 1.0 / n
    q = len(rule.points)
    xi = np.tile(rule.points, (n, 1))
    w = np.tile(rule.weights * h, (n, 1))
    s = rule.points
    if singular_left:
        xi[0] = s**3
        w[0] = rule.weights * 3 * s**2 * h
    if singular_right:
        xi[n - 1] = 1 - s**3
        w[n - 1] = rule.weights * 3 * s**2 * h
    assert xi.shape == (n, q)
    return xi, w


def speed_basis_table(n: int, xi: np.ndarray, singular_left: bool, singular_right: bool) -> np.ndarray:
    """Speed shapes for every element at its points ``xi[e]``: ``(n, npts, 4, 3)``."""
    h = 1.0 / n
    out = hermite_basis(xi, h)
    if singular_left:
        out[0] = singular_basis(xi[0], h, "left")
    if singular_right:
        out[n - 1] = singular_basis(xi[n - 1], h, "right")
    return out


@dataclass
class FieldCoefficients:
    """Nodal ``(value, u-derivative)`` pairs for one scalar field."""

    values: np.ndarray
    singular_left: bool = False
    singular_right: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(-1, 2)
        if self.singular_left:
            self.values[0, 0] = 0.0
        if self.singular_right:
            self.values[-1, 0] = 0.0

    @property
    def mesh(self) -> Mesh:
        return Mesh(len(self.values) - 1)

    @classmethod
    def from_function(cls, f, df, n: int) -> "FieldCoefficients":
        u = np.arange(n + 1) / n
        return cls(np.stack([f(u), df(u)], 1))

    def element_dofs(self) -> np.ndarray:
        v = self.values
        return np.concatenate([v[:-1], v[1:]], axis=1)


def evaluate_field(c: FieldCoefficients, u):
    """Value, first and second u-derivative of the field at ``u``."""
    mesh = c.mesh
    u = np.asarray(u, dtype=float)
    e, xi = mesh.locate(u)
    basis = hermite_basis(xi, mesh.h)
    if c.singular_left or c.singular_right:
        basis = np.array(basis)
        if c.singular_left:
            sel = e == 0
            basis[sel] = singular_basis(xi[sel], mesh.h, "left")
        if c.singular_right:
            sel = e == mesh.n - 1
            basis[sel] = singular_basis(xi[sel], mesh.h, "right")
    dofs = c.element_dofs()[e]
    with np.errstate(invalid="ignore"):
        out = np.einsum("...kd,...k->...d", np.nan_to_num(basis, posinf=0.0, neginf=0.0), dofs)
        if c.singular_left or c.singular_right:
            # keep the unbounded derivative visible exactly at a singular end
            sing = np.isinf(basis).any(-2)
            out = np.where(sing, basis[..., 1 if c.singular_left else 3, :] * np.inf, out)
    return out[..., 0], out[..., 1], out[..., 2]


@dataclass
class DofLayout:
    """Index maps of the full unknown vector and the boundary elimination.

    Full vector order: theta pairs ``(theta_i, theta'_i)``, speed pairs
    ``(v_i, v'_i)``, ``lam``, then ``(x_j, y_j)`` for the ``N`` auxiliary
    position points.
    """

    n: int
    M: int
    n_points: int
    point_u: np.ndarray
    fixed_values: dict = field(default_factory=dict)
    singular_left: bool = False
    singular_right: bool = False

    @property
    def theta_offset(self) -> int:
        return 0

    @property
    def speed_offset(self) -> int:
        return 2 * (self.n + 1)

    @property
    def lam_index(self) -> int:
        return 4 * (self.n + 1)

    @property
    def position_offset(self) -> int:
        return 4 * (self.n + 1) + 1

    @property
    def total(self) -> int:
        return 4 * (self.n + 1) + 2 * self.n_points + 1

    def theta_index(self, node, deriv):
        return 2 * np.asarray(node) + deriv

    def speed_index(self, node, deriv):
        return self.speed_offset + 2 * np.asarray(node) + deriv

    def position_index(self, point, coord):
        return self.position_offset + 2 * np.asarray(point) + coord

    @property
    def free(self) -> np.ndarray:
        mask = np.ones(self.total, dtype=bool)
        mask[list(self.fixed_values)] = False
        return np.flatnonzero(mask)

    @property
    def n_free(self) -> int:
        return self.total - len(self.fixed_values)

    def full_to_free(self) -> np.ndarray:
        out = np.full(self.total, -1, dtype=np.int64)
        out[self.free] = np.arange(self.n_free)
        return out

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        z = np.empty(self.total)
        z[self.free] = x_free
        for k, val in self.fixed_values.items():
            z[k] = val
        return z

    def theta_element_index(self) -> np.ndarray:
        e = np.arange(self.n)
        return np.stack([2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3], 1)

    def speed_element_index(self) -> np.ndarray:
        return self.theta_element_index() + self.speed_offset


def dof_layout(n: int, M: int, has_obstacles: bool, bc) -> DofLayout:
    """Build the layout for boundary states ``bc = (start, end)``.

    Eliminated: both orientations, both speeds (zero at a singular end),
    ``theta'`` at an end with zero curvature, and both end positions.
    """
    start, end = bc
    if has_obstacles:
        n_points = n * M + n + 1
        point_u = np.arange(n_points) / (n * (M + 1))
    else:
        n_points = n + 1
        point_u = np.arange(n + 1) / n
    lay = DofLayout(n, M, n_points, point_u,
                    singular_left=start.speed == 0, singular_right=end.speed == 0)
    fixed = lay.fixed_values
    fixed[int(lay.theta_index(0, 0))] = float(start.orientation)
    fixed[int(lay.theta_index(n, 0))] = float(end.orientation)
    if start.curvature == 0:
        fixed[int(lay.theta_index(0, 1))] = 0.0
    if end.curvature == 0:
        fixed[int(lay.theta_index(n, 1))] = 0.0
    fixed[int(lay.speed_index(0, 0))] = float(start.speed)
    fixed[int(lay.speed_index(n, 0))] = float(end.speed)
    for j, pos in ((0, start.position), (n_points - 1, end.position)):
        fixed[int(lay.position_index(j, 0))] = float(pos[0])
        fixed[int(lay.position_index(j, 1))] = float(pos[1])
    return lay

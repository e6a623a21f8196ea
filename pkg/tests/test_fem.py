import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from comfortplan.fem import (
    GAUSS12, SINGULAR_EXPONENT, FieldCoefficients, Mesh, QuadratureRule, evaluate_field,
    hermite_basis, singular_basis, singular_mode,
)
from conftest import central_difference


def test_gauss_rule_exact_to_degree_23():
    for k in range(24):
        assert GAUSS12.integrate(lambda x: x**k) == pytest.approx(1 / (k + 1), rel=1e-13)
    assert QuadratureRule.gauss_legendre(3).integrate(lambda x: x**6) != pytest.approx(1 / 7)


@given(st.floats(0, 1))
def test_hermite_partition_of_unity(xi):
    b = hermite_basis(xi, 0.25)
    assert b[0, 0] + b[2, 0] == pytest.approx(1.0)
    assert b[0, 1] + b[2, 1] == pytest.approx(0.0, abs=1e-12)


def test_hermite_derivatives_by_finite_differences():
    h = 0.2
    xi = np.linspace(0.05, 0.95, 7)
    b = hermite_basis(xi, h)
    d = central_difference(lambda x: hermite_basis(x, h)[:, :, 0].ravel(), xi, 1e-6)
    # u = h xi, so d/du = (1/h) d/dxi
    d1 = np.array([d[k * 4:(k + 1) * 4, k] for k in range(len(xi))]) / h
    assert np.allclose(d1, b[:, :, 1], atol=1e-7)


@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_cubics_are_reproduced(c):
    f = lambda u: c[0] + c[1] * u + c[2] * u**2 + c[3] * u**3
    df = lambda u: c[1] + 2 * c[2] * u + 3 * c[3] * u**2
    field = FieldCoefficients.from_function(f, df, 5)
    u = np.linspace(0, 1, 41)
    val, d1, d2 = evaluate_field(field, u)
    assert np.allclose(val, f(u), atol=1e-10)
    assert np.allclose(d1, df(u), atol=1e-9)
    assert np.allclose(d2, 2 * c[2] + 6 * c[3] * u, atol=1e-8)


def test_singular_mode_vanishes_with_slope_at_the_far_node():
    val, d1, _ = singular_mode(np.array([1.0]))
    assert val[0] == pytest.approx(0.0, abs=1e-14)
    assert d1[0] == pytest.approx(0.0, abs=1e-13)
    val0, d10, d20 = singular_mode(np.array([0.0]))
    assert val0[0] == 0 and np.isinf(d10[0]) and np.isinf(d20[0])


def test_singular_mode_derivatives():
    t = np.linspace(0.1, 0.9, 9)
    val, d1, d2 = singular_mode(t)
    assert np.allclose(d1, np.diag(central_difference(lambda x: singular_mode(x)[0], t)), rtol=1e-7)
    assert np.allclose(d2, np.diag(central_difference(lambda x: singular_mode(x)[1], t)), rtol=1e-6)


def test_singular_mode_exponent():
    t = np.logspace(-6, -4, 20)
    slope = np.polyfit(np.log(t), np.log(singular_mode(t)[0]), 1)[0]
    assert slope == pytest.approx(SINGULAR_EXPONENT, abs=1e-3)


@pytest.mark.parametrize("side", ["left", "right"])
def test_singular_element_reproduces_power_law(side):
    # v = c u^(2/3) near the left end (mirrored on the right) plus a cubic tail
    n, c = 8, 1.7
    h = 1.0 / n
    if side == "left":
        g = lambda u: c * u ** (2 / 3)
        dg = lambda u: (2 / 3) * c * u ** (-1 / 3)
    else:
        g = lambda u: c * (1 - u) ** (2 / 3)
        dg = lambda u: -(2 / 3) * c * (1 - u) ** (-1 / 3)
    u_nodes = np.arange(n + 1) / n
    with np.errstate(divide="ignore"):
        vals = np.stack([g(u_nodes), dg(u_nodes)], 1)
    # the singular amplitude slot holds c h^(2/3) instead of an end slope
    if side == "left":
        vals[0] = (0.0, c * h ** (2 / 3))
    else:
        vals[-1] = (0.0, c * h ** (2 / 3))
    field = FieldCoefficients(vals, side == "left", side == "right")
    u = np.linspace(0.001, h, 30) if side == "left" else 1 - np.linspace(0.001, h, 30)
    val, d1, _ = evaluate_field(field, u)
    assert np.allclose(val, g(u), rtol=1e-12)
    assert np.allclose(d1, dg(u), rtol=1e-10)


def test_singular_basis_rejects_unknown_side():
    with pytest.raises(ValueError):
        singular_basis(0.5, 1.0, "middle")


@given(st.integers(1, 64), st.floats(0, 1))
def test_locate_round_trip(n, u):
    e, xi = Mesh(n).locate(u)
    assert 0 <= e < n and -1e-12 <= xi <= 1 + 1e-12
    assert (e + xi) / n == pytest.approx(u, abs=1e-12)

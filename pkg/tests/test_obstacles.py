import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from comfortplan.obstacles import (
    CenterCoincidence, Circle, Ellipse, Rectangle, StarPolygon, clearance, clearance_derivatives,
    make_obstacle,
)
from conftest import central_difference, rel_err

SHAPES = {
    "circle": Circle(0.7),
    "ellipse": Ellipse(0.9, 0.3, 0.4),
    "rectangle": Rectangle(1.0, 0.4, 0.3),
    "polygon": StarPolygon((1.0, 0.6, 1.2, 0.8, 0.9), (0.0, 1.2, 2.5, 3.9, 5.1)),
}


@pytest.mark.parametrize("name", sorted(SHAPES))
@settings(max_examples=40, deadline=None)
@given(r=st.floats(0.3, 3.0), phi=st.floats(-math.pi, math.pi))
def test_clearance_derivatives_by_finite_differences(name, r, phi):
    o = make_obstacle(SHAPES[name], (0.5, -0.2))
    p = np.array([0.5 + r * math.cos(phi), -0.2 + r * math.sin(phi)])
    # stay clear of rectangle and polygon fillet joints where d2rho jumps
    if o.corner_angles:
        gaps = np.abs(np.angle(np.exp(1j * (phi - np.asarray(o.corner_angles)))))
        assume(gaps.min() > 0.05)
    val, grad, hess = clearance_derivatives(o, p)
    assert val == pytest.approx(clearance(o, p))
    assert rel_err(grad, central_difference(lambda z: clearance(o, z), p, 1e-7)) < 1e-6
    assert rel_err(hess, central_difference(lambda z: clearance_derivatives(o, z)[1], p, 1e-6)) < 1e-5


def test_ellipse_boundary_has_zero_clearance():
    o = make_obstacle(Ellipse(2.0, 1.0, 0.5), (1.0, 1.0))
    t = np.linspace(0, 2 * math.pi, 17)
    c, s = math.cos(0.5), math.sin(0.5)
    x, y = 2 * np.cos(t), np.sin(t)
    pts = np.stack([1 + c * x - s * y, 1 + s * x + c * y], 1)
    assert np.allclose(clearance(o, pts), 0.0, atol=1e-12)


@pytest.mark.parametrize("name", sorted(SHAPES))
def test_sign_convention(name):
    o = make_obstacle(SHAPES[name], (0.0, 0.0))
    assert clearance(o, np.array([0.05, 0.02])) < 0
    assert clearance(o, np.array([5.0, -4.0])) > 0


def test_rectangle_radius_is_smooth_through_corners():
    o = make_obstacle(Rectangle(1.0, 0.5), (0.0, 0.0))
    jumps = []
    for k in (4000, 8000):
        rho, drho, _ = o.rho(np.linspace(0, 2 * math.pi, k + 1))
        jumps.append((np.max(np.abs(np.diff(rho))), np.max(np.abs(np.diff(drho)))))
    # both rho and rho' are continuous: their largest jumps halve with the grid
    assert jumps[1][0] / jumps[0][0] == pytest.approx(0.5, abs=0.05)
    assert jumps[1][1] / jumps[0][1] == pytest.approx(0.5, abs=0.05)
    # away from the fillets the radius is the exact rectangle boundary
    assert o.rho(0.0)[0] == pytest.approx(1.0)
    assert o.rho(math.pi / 2)[0] == pytest.approx(0.5)


def test_center_query_raises():
    o = make_obstacle(Circle(1.0), (2.0, 3.0))
    with pytest.raises(CenterCoincidence):
        clearance(o, np.array([2.0, 3.0]))


def test_invalid_specs():
    with pytest.raises(ValueError):
        Circle(0.0)
    with pytest.raises(ValueError):
        Ellipse(1.0, -1.0)
    with pytest.raises(ValueError, match="star-shaped"):
        StarPolygon((1, 1, 1), (0.0, 0.2, 0.4))
    with pytest.raises(ValueError):
        StarPolygon((1, 1), (0.0, 1.0))
    with pytest.raises(TypeError):
        make_obstacle(object(), (0, 0))

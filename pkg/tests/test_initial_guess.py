import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from comfortplan import BoundaryState, PlanningProblem
from comfortplan.core import position_increment
from comfortplan.fem import evaluate_field
from comfortplan.initial_guess import (
    VARIANT_SHIFT, VARIANTS, path_guess_all, path_guess_seed, speed_guess,
)
from conftest import s_shape

angles = st.floats(-math.pi, math.pi)


@settings(max_examples=15, deadline=None)
@given(st.floats(-8, 8), st.floats(-8, 8), angles, angles)
def test_seed_orientation_ends(x, y, th0, th1):
    if math.hypot(x, y) < 0.5:
        x += 1.0
    p = PlanningProblem(BoundaryState((0, 0), th0), BoundaryState((x, y), th1), n=16)
    for v in VARIANTS:
        theta, lam = path_guess_seed(p, v)
        assert theta.values[0, 0] == pytest.approx(th0)
        assert theta.values[-1, 0] == pytest.approx(th1 + VARIANT_SHIFT[v])
        assert lam >= p.chord_length - 1e-12


def test_base_seeds_turn_in_opposite_directions():
    p = s_shape()
    a, _ = path_guess_seed(p, "base_A")
    b, _ = path_guess_seed(p, "base_B")
    assert a.values[0, 1] > 0 > b.values[0, 1]


def test_unknown_variant():
    with pytest.raises(ValueError):
        path_guess_seed(s_shape(), "sideways")


@settings(max_examples=6, deadline=None)
@given(st.floats(1, 10), angles, angles)
def test_converged_path_guesses_close_the_displacement(d, line, th1):
    end = (d * math.cos(line), d * math.sin(line))
    p = PlanningProblem(BoundaryState((0, 0), 0.0), BoundaryState(end, th1))
    guesses = path_guess_all(p)
    assert guesses, "at least one variant must produce a path"
    for g in guesses:
        inc = position_increment(lambda u: evaluate_field(g.theta, u)[0], g.lam, panels=64)
        assert inc == pytest.approx(end, abs=1e-6)


def test_rest_to_rest_speed_guess():
    p = s_shape()
    g = path_guess_all(p, ["base_B"])[0]
    sg = speed_guess(p, g)
    assert sg.speed.singular_left and sg.speed.singular_right
    u = np.linspace(1e-4, 1 - 1e-4, 400)
    v = evaluate_field(sg.speed, u)[0]
    assert np.all(v > 0) and np.all(v <= p.bounds.speed_max + 1e-9)


@pytest.mark.parametrize("v0,v1", [(1.0, 2.0), (0.0, 1.5), (1.0, 0.0)])
def test_speed_guess_matches_end_speeds(v0, v1):
    p = PlanningProblem(BoundaryState((0, 0), 0.0, 0, v0), BoundaryState((6, 2), 0.5, 0, v1))
    g = path_guess_all(p, ["base_A"])[0]
    sg = speed_guess(p, g)
    v = evaluate_field(sg.speed, np.array([0.0, 1.0]))[0]
    assert v == pytest.approx([v0, v1], abs=1e-12)
    assert sg.speed.singular_left == (v0 == 0) and sg.speed.singular_right == (v1 == 0)

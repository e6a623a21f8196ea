import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from comfortplan import BoundaryState, PlanningProblem, WeightFactors
from comfortplan.weights import (
    CharacteristicScales, base_weight, characteristic_scales, effective_weights, problem_weights,
    quintic_reference,
)


def test_unit_quintic_time_is_fifteen_eighths():
    ref = quintic_reference(1.0, 1.0)
    assert ref.tau == pytest.approx(15 / 8, rel=1e-14)
    assert ref.max_speed == pytest.approx(1.0, rel=1e-14)


@given(st.floats(0.05, 50.0), st.floats(0.05, 20.0))
def test_quintic_peaks_at_the_speed_scale(L, V):
    ref = quintic_reference(L, V)
    assert ref.max_speed == pytest.approx(V, rel=1e-10)
    assert float(ref.position(ref.tau)) == pytest.approx(L, rel=1e-12)


@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_quintic_time_minimizes_its_discomfort(L, V):
    ref = quintic_reference(L, V)
    h = 1e-4 * ref.tau
    d0 = ref.discomfort()
    assert ref.discomfort(ref.tau + h) > d0
    assert ref.discomfort(ref.tau - h) > d0


def test_quintic_jerk_integral_matches_closed_form():
    ref = quintic_reference(2.0, 1.5)
    from comfortplan.fem import GAUSS12

    integral = GAUSS12.integrate(lambda t: ref.jerk(t) ** 2, 0.0, ref.tau)
    assert integral == pytest.approx(720 * ref.L**2 / ref.tau**5, rel=1e-12)


@given(st.floats(0.1, 20.0), st.floats(0.1, 5.0), st.floats(0.1, 10.0))
def test_base_weight_dimensions(L, V, c):
    # L^4 / V^6 scaling: time units are preserved when lengths scale by c
    w = base_weight(CharacteristicScales(L, V))
    assert base_weight(CharacteristicScales(c * L, c * V)) == pytest.approx(w / c**2, rel=1e-12)


def test_length_scale_uses_turning_circle_for_short_moves():
    assert characteristic_scales(1.0, 0.55, 3.0).L_star == pytest.approx(math.pi * 0.55)
    assert characteristic_scales(4.0, 0.55, 3.0).L_star == 4.0
    with pytest.raises(ValueError):
        characteristic_scales(0.0, 0.55, 3.0)


def test_factors_multiply_the_base_weight():
    w = effective_weights(WeightFactors(2.0, 0.5), 3.0)
    assert (w.w_T, w.w_N) == (6.0, 1.5)
    with pytest.raises(ValueError):
        WeightFactors(0.0, 1.0)


def test_override_and_per_problem_weights():
    a, b = BoundaryState((0, 0), 0.0), BoundaryState((8, 0), 0.0)
    p = PlanningProblem(a, b)
    expected = base_weight(CharacteristicScales(8.0, 3.0))
    assert problem_weights(p).w_T == pytest.approx(expected)
    p2 = PlanningProblem(a, b, weights_override=(1.0, 2.0))
    assert (problem_weights(p2).w_T, problem_weights(p2).w_N) == (1.0, 2.0)

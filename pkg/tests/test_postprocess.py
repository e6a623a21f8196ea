import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from comfortplan.postprocess import (
    TABLE_HEADER, TimeMapDivergence, cost_report, run_summary, sample_trajectory, time_map,
    time_map_function, to_json,
)


@given(st.floats(0.1, 5.0), st.floats(0.1, 10.0))
def test_constant_speed_time(v, lam):
    tab = time_map_function(lambda u: np.full_like(u, v), lam, n=8, rows=64)
    assert tab.tau == pytest.approx(lam / v, rel=1e-12)
    assert np.all(np.diff(tab.t) > 0)


def test_singular_ends_time_integral():
    # v = c (u (1 - u))^(2/3): int lam / v du = lam / c * B(1/3, 1/3)
    c, lam = 2.0, 3.0
    tab = time_map_function(lambda u: c * (u * (1 - u)) ** (2 / 3), lam, n=16, rows=2048,
                            singular_left=True, singular_right=True)
    beta = math.gamma(1 / 3) ** 2 / math.gamma(2 / 3)
    # the callable sees u, so 1 - u carries cancellation error near the right end
    assert tab.tau == pytest.approx(lam / c * beta, rel=1e-7)


def test_nonpositive_interior_speed_raises():
    with pytest.raises(TimeMapDivergence):
        time_map_function(lambda u: u - 0.5, 1.0, n=3, rows=30)


def test_trajectory_table_hits_both_ends(s_shape_plan):
    s = s_shape_plan.best_solution
    tab = sample_trajectory(s, 0.05)
    assert tab.t[0] == 0 and tab.t[-1] == pytest.approx(time_map(s).tau)
    assert (tab.x[0], tab.y[0]) == pytest.approx((0.0, 0.0), abs=1e-12)
    assert (tab.x[-1], tab.y[-1]) == pytest.approx((-1.0, -4.0), abs=1e-6)
    assert tab.v[0] == 0 and tab.v[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(tab.t) > 0)
    b = s.problem.bounds
    assert np.all(tab.v <= b.speed_max + 1e-6)
    assert np.all(np.abs(tab.a_n) <= b.normal_accel_max + 1e-3)


def test_csv_layout(s_shape_plan):
    tab = sample_trajectory(s_shape_plan.best_solution, 0.5)
    lines = tab.to_csv().splitlines()
    assert lines[0] == ",".join(TABLE_HEADER)
    assert len(lines) == len(tab) + 1
    with pytest.raises(ValueError):
        sample_trajectory(s_shape_plan.best_solution, 0.0)


def test_cost_identity(s_shape_plan):
    for s in s_shape_plan.converged:
        c = cost_report(s)
        assert c.total == pytest.approx(c.tau + c.f_T * c.J_T + c.f_N * c.J_N, rel=1e-12)
        assert c.total == pytest.approx(s.objective, rel=1e-8)
        assert c.tau == pytest.approx(time_map(s).tau, rel=1e-6)


def test_summary_is_strict_json(s_shape_plan):
    sols = list(s_shape_plan.solutions)
    doc = run_summary(sols, s_shape_plan.best, 1.0)
    doc["variants"][0]["objective"] = math.nan
    parsed = json.loads(to_json(doc))
    assert parsed["variants"][0]["objective"] is None
    assert parsed["best_variant"] == sols[s_shape_plan.best].variant

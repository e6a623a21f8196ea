import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from comfortplan.experiments import (
    DESK_GRID, PAPER_GRID, BatchGrid, BatchRecord, BatchReport, SweepResult, SweepRow,
    geometric_grid,
)


def test_grid_sizes():
    assert PAPER_GRID.size == 7500 == len(PAPER_GRID.keys())
    assert DESK_GRID.size == 108
    assert BatchGrid((), (1.0,), (0.0,), ((0.0, 0.0),)).size == 0


def test_grid_problem_geometry():
    p = BatchGrid.problem((90.0, 4.0, 180.0, 1.0, -0.1))
    assert p.end.position == pytest.approx((0.0, 4.0), abs=1e-12)
    assert p.end.orientation == pytest.approx(math.pi)
    assert p.start.speed == p.end.speed == 1.0
    assert p.start.tangential_acceleration == -0.1


@given(st.floats(1e-3, 1.0), st.integers(0, 8), st.floats(1.5, 8.0))
def test_geometric_grid(lo, k, ratio):
    g = geometric_grid(lo, lo * ratio**k, ratio)
    assert len(g) == k + 1
    assert np.allclose(g[1:] / g[:-1], ratio)


def test_geometric_grid_validation():
    with pytest.raises(ValueError):
        geometric_grid(0.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        geometric_grid(1.0, 2.0, 1.0)


def test_power_law_fit_recovers_slope():
    f_T = geometric_grid(2.0**-6, 2.0**6, 4.0)
    rows = [SweepRow(a, 1.0, "base_A", "converged", 10, 1 + 0.1 * np.log(a), 0.0, 0.0, 0.0)
            for a in f_T]
    rows = [SweepRow(r.f_T, 1.0, r.variant, r.status, 10, r.tau, 3.0 * r.f_T**-0.8, 1.0,
                     r.tau + 3.0 * r.f_T**0.2) for r in rows]
    res = SweepResult(rows, f_T, np.array([1.0]))
    slope, _, r2 = res.power_law()
    assert slope == pytest.approx(-0.8) and r2 == pytest.approx(1.0)
    s = res.summary()
    assert s["tau_non_decreasing_f_N_1"] and s["convergence_rate"] == 1.0


def test_failed_cells_lower_the_rate():
    rows = [SweepRow(1.0, 1.0, "base_A", "iteration_limit", 500, *[math.nan] * 4)]
    res = SweepResult(rows, np.array([1.0]), np.array([1.0]))
    assert res.convergence_rate() == 0.0
    assert math.isnan(res.power_law()[0])


def test_batch_stats():
    recs = [
        BatchRecord((0, 1, 0, 0, 0), [("base_A", "converged", 20), ("base_B", "converged", 250)], 2, 3.0, 1.0),
        BatchRecord((0, 2, 0, 0, 0), [("base_A", "infeasible", 80)], 0, math.inf, 2.0),
    ]
    st_ = BatchReport(recs).stats(200)
    assert st_["problems"] == 2 and st_["solves"] == 3
    assert st_["fraction_with_solution"] == 0.5
    assert st_["mean_solutions"] == 1.0
    assert st_["fraction_solves_within_limit"] == pytest.approx(1 / 3)
    assert st_["solutions_histogram"] == {"0": 1, "1": 0, "2": 1, "3": 0, "4": 0}
    assert sum(st_["iteration_histogram"]["counts"]) == 2
    assert sum(st_["wall_time_histogram"]["counts"]) == 2


def test_empty_report():
    st_ = BatchReport().stats()
    assert st_["problems"] == 0 and st_["solves"] == 0
    assert math.isnan(st_["mean_solutions"])

import itertools

import pytest

from comfortplan.initial_guess import VARIANTS
from comfortplan.pipeline import plan, select_best, variant_problem
from comfortplan.postprocess import cost_report
from conftest import s_shape


def test_best_is_cheapest_converged(s_shape_plan):
    conv = s_shape_plan.converged
    best = s_shape_plan.best_solution
    assert cost_report(best).total == min(cost_report(s).total for s in conv)


def test_best_selection_ignores_order(s_shape_plan):
    sols = s_shape_plan.solutions
    ref = s_shape_plan.best_solution.variant
    for perm in itertools.permutations(sols):
        assert perm[select_best(list(perm))].variant == ref


def test_empty_and_unconverged_selection(s_shape_plan):
    assert select_best([]) is None


def test_variant_problem_shifts_end_orientation():
    p = s_shape()
    assert variant_problem(p, "base_A") is p
    assert variant_problem(p, "plus_2pi").end.orientation == pytest.approx(2 * 3.141592653589793)


def test_guess_reuse_gives_identical_results(s_shape_plan):
    again = plan(s_shape(), ("base_B",), guesses=s_shape_plan.guesses)
    first = next(s for s in s_shape_plan.solutions if s.variant == "base_B")
    assert again.solutions[0].objective == first.objective
    assert again.solutions[0].iterations == first.iterations


def test_variants_subset_order():
    assert set(VARIANTS) == {"base_A", "base_B", "plus_2pi", "minus_2pi"}

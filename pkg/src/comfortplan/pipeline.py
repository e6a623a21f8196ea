"""Multi-start planning: path guesses, one discomfort solve per variant, best pick."""
from __future__ import annotations

import dataclasses
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .assembly import DiscomfortNlp
from .core import PlanningProblem
from .initial_guess import VARIANTS, VARIANT_SHIFT, PathGuess, path_guess_all, speed_guess
from .postprocess import Solution, cost_report
from .solver import SolverOptions, solve


@dataclass
class PlanResult:
    """All variant outcomes of one problem; ``best`` indexes ``solutions``."""

    solutions: list[Solution]
    best: int | None
    wall_time: float
    guesses: list[PathGuess] = field(default_factory=list)

    @property
    def converged(self) -> list[Solution]:
        return [s for s in self.solutions if s.converged]

    @property
    def best_solution(self) -> Solution | None:
        return None if self.best is None else self.solutions[self.best]


def variant_problem(problem: PlanningProblem, variant: str) -> PlanningProblem:
    """Same problem with the end orientation shifted to the variant's value."""
    shift = VARIANT_SHIFT[variant]
    if shift == 0:
        return problem
    end = dataclasses.replace(problem.end, orientation=problem.end.orientation + shift)
    return dataclasses.replace(problem, end=end)


def seed_solution(problem: PlanningProblem, guess: PathGuess) -> Solution:
    """The warm start of a variant packaged as an (unsolved) solution."""
    prob = variant_problem(problem, guess.variant)
    nlp = DiscomfortNlp(prob)
    sg = speed_guess(problem, guess)
    return Solution(prob, guess.theta, sg.speed, guess.lam, nlp.weights, guess.variant, "seed")


def solve_variant(problem: PlanningProblem, guess: PathGuess,
                  options: SolverOptions | None = None) -> Solution:
    """Run the discomfort solve for one path guess."""
    prob = variant_problem(problem, guess.variant)
    nlp = DiscomfortNlp(prob)
    sg = speed_guess(problem, guess)
    x0 = nlp.initial_point(guess.theta, sg.speed, guess.lam)
    rep = solve(nlp, x0, options or SolverOptions())
    tv = nlp.unpack(rep.x)
    return Solution(prob, tv.theta, tv.speed, tv.lam, nlp.weights, guess.variant, rep.status,
                    rep.iterations, rep.objective, rep.max_violation, list(rep.history))


def select_best(solutions) -> int | None:
    """Index of the cheapest converged solution (ties go to the first variant tag)."""
    best, best_key = None, None
    for i, s in enumerate(solutions):
        if not s.converged:
            continue
        key = (cost_report(s).total, VARIANTS.index(s.variant) if s.variant in VARIANTS else 99)
        if best_key is None or key < best_key:
            best, best_key = i, key
    return best


def _solve_job(args):
    problem, guess, options = args
    return solve_variant(problem, guess, options)


def plan(problem: PlanningProblem, variants=VARIANTS, options: SolverOptions | None = None,
         guess_iterations: int = 100, workers: int = 1, guesses=None) -> PlanResult:
    """Solve every variant whose path guess converged and pick the cheapest.

    Precomputed ``guesses`` skip the path problems; they only depend on the
    boundary states and the turn radius, so sweeps over weights reuse them.
    """
    t0 = time.perf_counter()
    if guesses is None:
        guesses = path_guess_all(problem, variants, guess_iterations)
    else:
        guesses = [g for g in guesses if g.variant in variants]
    jobs = [(problem, g, options) for g in guesses]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            sols = list(pool.map(_solve_job, jobs))
    else:
        sols = [_solve_job(j) for j in jobs]
    return PlanResult(sols, select_best(sols), time.perf_counter() - t0, guesses)


def plan_many(problems, variants=VARIANTS, options: SolverOptions | None = None,
              guess_iterations: int = 100, workers: int = 1) -> list[PlanResult]:
    """Plan independent problems, in parallel across problems when ``workers > 1``."""
    args = [(p, tuple(variants), options, guess_iterations) for p in problems]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_plan_job, args, chunksize=1))
    return [_plan_job(a) for a in args]


def _plan_job(args):
    problem, variants, options, guess_iterations = args
    return plan(problem, variants, options, guess_iterations)


def solution_cost(s: Solution) -> float:
    return cost_report(s).total if s.converged else math.inf


"""Weight sweeps and reliability batches built on :func:`comfortplan.pipeline.plan`."""
from __future__ import annotations

import dataclasses
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import BoundaryState, PlanningProblem, WeightFactors
from .initial_guess import VARIANTS, path_guess_all
from .pipeline import plan
from .postprocess import cost_report
from .solver import SolverOptions

SWEEP_HEADER = ("f_T", "f_N", "variant", "status", "iterations", "tau", "J_T", "J_N", "total")


def geometric_grid(lo: float, hi: float, ratio: float) -> np.ndarray:
    """``lo, lo*ratio, ...`` up to ``hi`` inclusive."""
    if not (lo > 0 and hi >= lo and ratio > 1):
        raise ValueError("need 0 < lo <= hi and ratio > 1")
    k = int(math.floor(math.log(hi / lo) / math.log(ratio) + 1e-9))
    return lo * ratio ** np.arange(k + 1)


# ------------------------------------------------------------ sweeps
@dataclass(frozen=True)
class SweepRow:
    f_T: float
    f_N: float
    variant: str
    status: str
    iterations: int
    tau: float
    J_T: float
    J_N: float
    total: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"


@dataclass
class SweepResult:
    rows: list[SweepRow]
    f_T: np.ndarray
    f_N: np.ndarray

    def best(self, f_T: float, f_N: float) -> SweepRow | None:
        cands = [r for r in self.rows if r.f_T == f_T and r.f_N == f_N and r.converged]
        return min(cands, key=lambda r: (r.total, VARIANTS.index(r.variant)), default=None)

    def convergence_rate(self) -> float:
        """Fraction of grid cells with at least one converged variant."""
        cells = [(a, b) for a in self.f_T for b in self.f_N]
        return sum(self.best(a, b) is not None for a, b in cells) / max(len(cells), 1)

    def along_f_T(self, f_N: float = 1.0):
        """``(f_T, best row)`` pairs at fixed ``f_N`` for the cells that converged."""
        out = [(a, self.best(a, f_N)) for a in self.f_T]
        return [(a, r) for a, r in out if r is not None]

    def power_law(self, f_N: float = 1.0):
        """Least-squares fit of ``log J_T`` against ``log f_T``: ``(slope, intercept, r2)``."""
        pts = [(a, r.J_T) for a, r in self.along_f_T(f_N) if r.J_T > 0]
        if len(pts) < 2:
            return math.nan, math.nan, math.nan
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
        return float(slope), float(intercept), r2

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(SWEEP_HEADER) + "\n")
        for r in self.rows:
            vals = [getattr(r, k) for k in SWEEP_HEADER]
            buf.write(",".join(v if isinstance(v, str) else f"{v:.9g}" for v in vals) + "\n")
        return buf.getvalue()

    def summary(self) -> dict:
        slope, intercept, r2 = self.power_law()
        taus = [r.tau for _, r in self.along_f_T()]
        return {
            "cells": int(len(self.f_T) * len(self.f_N)),
            "convergence_rate": self.convergence_rate(),
            "power_law_f_N_1": {"slope": slope, "intercept": intercept, "r2": r2},
            "tau_non_decreasing_f_N_1": bool(np.all(np.diff(taus) >= -1e-6)) if taus else False,
        }


def sweep_problem(problem: PlanningProblem) -> PlanningProblem:
    """The unconstrained version of ``problem`` used for weight sweeps."""
    return dataclasses.replace(problem, impose_bounds=False)


def _sweep_cell(args):
    problem, f_T, f_N, variants, options, guesses = args
    cell = dataclasses.replace(problem, weights=WeightFactors(f_T, f_N))
    res = plan(cell, variants, options, guesses=guesses)
    rows = []
    for s in res.solutions:
        if s.converged:
            c = cost_report(s)
            rows.append(SweepRow(f_T, f_N, s.variant, s.status, s.iterations, c.tau, c.J_T, c.J_N,
                                 c.total))
        else:
            rows.append(SweepRow(f_T, f_N, s.variant, s.status, s.iterations, *([math.nan] * 4)))
    return rows


def weight_sweep(problem: PlanningProblem, f_T, f_N, variants=VARIANTS,
                 options: SolverOptions | None = None, workers: int = 1) -> SweepResult:
    """Solve the unconstrained problem on the grid ``f_T x f_N``.

    Path guesses are computed once; a failed cell only leaves non-converged
    rows behind.
    """
    base = sweep_problem(problem)
    guesses = path_guess_all(base, variants)
    jobs = [(base, float(a), float(b), tuple(variants), options, guesses) for a in f_T for b in f_N]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_sweep_cell, jobs))
    else:
        chunks = [_sweep_cell(j) for j in jobs]
    rows = [r for c in chunks for r in c]
    return SweepResult(rows, np.asarray(f_T, dtype=float), np.asarray(f_N, dtype=float))


# ------------------------------------------------------------ batches
@dataclass(frozen=True)
class BatchGrid:
    """Radial-line problems: start at the origin facing +x, end at ``distance``
    along the line at ``line`` degrees facing ``orientation`` degrees; each
    ``(speed, accel)`` pair is applied to both ends."""

    lines: tuple[float, ...]
    distances: tuple[float, ...]
    orientations: tuple[float, ...]
    pairs: tuple[tuple[float, float], ...]

    @property
    def size(self) -> int:
        return len(self.lines) * len(self.distances) * len(self.orientations) * len(self.pairs)

    def keys(self):
        return [(ln, d, o, v, a) for ln in self.lines for d in self.distances
                for o in self.orientations for v, a in self.pairs]

    @staticmethod
    def problem(key) -> PlanningProblem:
        ln, d, o, v, a = key
        end = (d * math.cos(math.radians(ln)), d * math.sin(math.radians(ln)))
        return PlanningProblem(BoundaryState((0.0, 0.0), 0.0, 0.0, v, a),
                               BoundaryState(end, math.radians(o), 0.0, v, a))


PAPER_GRID = BatchGrid(
    tuple(float(x) for x in range(0, 181, 20)),
    (1.0, 2.0, 4.0, 8.0, 16.0),
    tuple(float(x) for x in range(0, 360, 12)),
    ((0.0, 0.0), (1.0, -0.1), (1.0, 0.0), (1.0, 0.1), (3.0, 0.0)),
)
DESK_GRID = BatchGrid(
    (0.0, 90.0, 180.0),
    (2.0, 8.0),
    tuple(float(x) for x in range(0, 360, 60)),
    ((0.0, 0.0), (1.0, -0.1), (3.0, 0.0)),
)


@dataclass
class BatchRecord:
    key: tuple
    solves: list[tuple[str, str, int]]
    solutions: int
    best_total: float
    wall_time: float


@dataclass
class BatchReport:
    records: list[BatchRecord] = field(default_factory=list)

    def solves(self):
        return [s for r in self.records for s in r.solves]

    def stats(self, iteration_limit: int = 200) -> dict:
        recs = self.records
        n = len(recs)
        sols = np.array([r.solutions for r in recs], dtype=int)
        solves = self.solves()
        iters = np.array([it for _, st, it in solves if st == "converged"], dtype=int)
        within = sum(st == "converged" and it <= iteration_limit for _, st, it in solves)
        times = np.array([r.wall_time for r in recs])
        it_edges = np.arange(0, max(int(iters.max(initial=0)), 1) + 26, 25)
        t_edges = np.linspace(0.0, max(float(times.max(initial=0.0)), 1e-9), 11)
        return {
            "problems": n,
            "solves": len(solves),
            "fraction_with_solution": float(np.mean(sols > 0)) if n else math.nan,
            "mean_solutions": float(sols.mean()) if n else math.nan,
            "fraction_solves_within_limit": within / len(solves) if solves else math.nan,
            "iteration_limit": iteration_limit,
            "solutions_histogram": {str(k): int(np.sum(sols == k)) for k in range(len(VARIANTS) + 1)},
            "iteration_histogram": {"edges": it_edges.tolist(),
                                    "counts": np.histogram(iters, it_edges)[0].tolist()},
            "wall_time_histogram": {"edges": t_edges.tolist(),
                                    "counts": np.histogram(times, t_edges)[0].tolist()},
            "total_wall_time": float(times.sum()),
        }

    def document(self, iteration_limit: int = 200) -> dict:
        return {
            "stats": self.stats(iteration_limit),
            "problems": [
                {"line": r.key[0], "distance": r.key[1], "orientation": r.key[2],
                 "speed": r.key[3], "accel": r.key[4], "solutions": r.solutions,
                 "best_total": None if not math.isfinite(r.best_total) else r.best_total,
                 "wall_time": r.wall_time,
                 "solves": [{"variant": v, "status": s, "iterations": i} for v, s, i in r.solves]}
                for r in self.records
            ],
        }


def _batch_job(args):
    key, options, base_weight = args
    problem = BatchGrid.problem(key)
    if base_weight is not None:
        f = problem.weights
        problem = dataclasses.replace(problem, weights_override=(f.f_T * base_weight,
                                                                  f.f_N * base_weight))
    t0 = time.perf_counter()
    res = plan(problem, options=options)
    best = res.best_solution
    return BatchRecord(key, [(s.variant, s.status, s.iterations) for s in res.solutions],
                       len(res.converged), cost_report(best).total if best else math.inf,
                       time.perf_counter() - t0)


def run_batch(grid: BatchGrid, options: SolverOptions | None = None, workers: int = 1,
              base_weight: float | None = None, progress=None) -> BatchReport:
    """Plan every grid problem (no obstacles).

    ``base_weight`` freezes the base weight for the whole batch instead of
    recomputing it per problem.  ``progress`` is called with each record.
    """
    options = options or SolverOptions(max_iterations=200)
    jobs = [(k, options, base_weight) for k in grid.keys()]
    report = BatchReport()
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rec in pool.map(_batch_job, jobs, chunksize=1):
                report.records.append(rec)
                if progress:
                    progress(rec)
    else:
        for j in jobs:
            rec = _batch_job(j)
            report.records.append(rec)
            if progress:
                progress(rec)
    return report

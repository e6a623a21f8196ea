"""Command-line front end.

``comfortplan solve FILE --out DIR`` plans one problem file and writes per-variant
trajectory tables, iteration logs and ``summary.json``.  ``sweep`` and ``batch``
run the weight sweep and the reliability batch.

Exit codes: 0 when at least one variant converged (or nothing was asked of the
solver), 2 when nothing converged, 1 on malformed input.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from .experiments import DESK_GRID, PAPER_GRID, BatchGrid, geometric_grid, run_batch, weight_sweep
from .initial_guess import VARIANTS, path_guess_all
from .pipeline import plan, seed_solution, select_best
from .postprocess import TimeMapDivergence, run_summary, sample_trajectory, to_json
from .problem_file import ProblemFileError, load_problem
from .solver import SolverOptions

log = logging.getLogger("comfortplan")

EXIT_OK, EXIT_INPUT, EXIT_NO_CONVERGENCE = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _log_iteration(rec):
    log.info("%s", rec.line())


def _variants(text: str | None):
    if text is None:
        return VARIANTS
    names = tuple(v.strip() for v in text.split(",") if v.strip())
    bad = [v for v in names if v not in VARIANTS]
    if bad or not names:
        raise InputError(f"--variants: unknown variant(s) {bad or text!r}; choose from "
                         + ", ".join(VARIANTS))
    return tuple(v for v in VARIANTS if v in names)


def _floats(text: str, flag: str):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated numbers, got {text!r}") from None


def _pairs(text: str):
    out = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            v, a = item.split(":")
            out.append((float(v), float(a)))
        except ValueError:
            raise InputError(f"--pairs: expected speed:accel items, got {item!r}") from None
    return tuple(out)


def _options(args, tol=1e-8, max_iter=500) -> SolverOptions:
    return SolverOptions(relative_tolerance=tol,
                         max_iterations=args.max_iter if args.max_iter else max_iter,
                         log=_log_iteration if args.verbose else None)


def _load(args):
    spec = load_problem(args.problem)
    problem = spec.problem
    if getattr(args, "no_obstacles", False):
        problem = dataclasses.replace(problem, obstacles=())
    if getattr(args, "base_weight", None) is not None:
        f = problem.weights
        problem = dataclasses.replace(
            problem, weights_override=(f.f_T * args.base_weight, f.f_N * args.base_weight))
    return spec, problem


# ------------------------------------------------------------ commands
def cmd_solve(args) -> int:
    spec, problem = _load(args)
    variants = _variants(args.variants)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    if args.seed_only:
        sols = [seed_solution(problem, g) for g in path_guess_all(problem, variants)]
        best = None
    else:
        res = plan(problem, variants, _options(args, spec.tolerance, spec.max_iterations),
                   workers=args.workers)
        sols, best = res.solutions, res.best
    wall = time.perf_counter() - t0

    summary = run_summary(sols, best, wall)
    for s, entry in zip(sols, summary["variants"]):
        files = {}
        if s.converged or args.seed_only:
            try:
                table = sample_trajectory(s, args.dt)
            except TimeMapDivergence as exc:
                log.warning("%s: no trajectory table (%s)", s.variant, exc)
            else:
                name = f"trajectory_{s.variant}.csv"
                (out / name).write_text(table.to_csv())
                files["trajectory"] = name
        if not args.seed_only:
            name = f"iterations_{s.variant}.log"
            (out / name).write_text("".join(r.line() + "\n" for r in s.history))
            files["iterations"] = name
        entry["files"] = files
    missing = sorted(set(variants) - {s.variant for s in sols})
    summary["variants_without_guess"] = missing
    summary["name"] = spec.name
    summary["mode"] = "seed" if args.seed_only else "solve"
    (out / "summary.json").write_text(to_json(summary) + "\n")

    for e in summary["variants"]:
        log.info("%-9s %-17s it=%4d", e["variant"], e["status"], e["iterations"])
    if args.seed_only:
        return EXIT_OK if sols else EXIT_NO_CONVERGENCE
    if best is None:
        print("no variant converged", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    b = summary["variants"][best]
    print(f"best {b['variant']}: tau={b['tau']:.4f} total={b['total']:.4f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    _, problem = _load(args)
    variants = _variants(args.variants)
    try:
        f_T = geometric_grid(*args.f_t, args.ratio)
        f_N = geometric_grid(*args.f_n, args.ratio)
    except ValueError as exc:
        raise InputError(f"sweep grid: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    res = weight_sweep(problem, f_T, f_N, variants, _options(args), workers=args.workers)
    summary = res.summary()
    summary["wall_time"] = time.perf_counter() - t0
    (out / "sweep.csv").write_text(res.to_csv())
    (out / "sweep_summary.json").write_text(to_json(summary) + "\n")
    print(f"{summary['convergence_rate']:.0%} of {summary['cells']} cells converged")
    return EXIT_OK if summary["convergence_rate"] > 0 else EXIT_NO_CONVERGENCE


def cmd_batch(args) -> int:
    base = PAPER_GRID if args.grid == "paper" else DESK_GRID
    grid = BatchGrid(
        base.lines if args.lines is None else _floats(args.lines, "--lines"),
        base.distances if args.distances is None else _floats(args.distances, "--distances"),
        base.orientations if args.orientations is None else _floats(args.orientations,
                                                                    "--orientations"),
        base.pairs if args.pairs is None else _pairs(args.pairs),
    )
    if any(d <= 0 for d in grid.distances):
        raise InputError("--distances: values must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def progress(rec):
        log.info("%s solutions=%d %.1fs", rec.key, rec.solutions, rec.wall_time)

    report = run_batch(grid, _options(args, max_iter=200), args.workers, args.base_weight,
                       progress)
    doc = report.document(args.iteration_limit)
    (out / "batch.json").write_text(to_json(doc) + "\n")
    st = doc["stats"]
    print(f"{st['problems']} problems, mean solutions {st['mean_solutions']:.2f}")
    return EXIT_OK


# ------------------------------------------------------------ parser
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: %(default)s)")
    common.add_argument("--verbose", action="store_true", help="log solver iterations")
    common.add_argument("--workers", type=int, default=1, help="worker processes")
    common.add_argument("--max-iter", type=int, default=None,
                        help="override the solver iteration limit")
    common.add_argument("--base-weight", type=float, default=None,
                        help="freeze the base weight instead of deriving it per problem")

    p = _Parser(prog="comfortplan", description="Comfort-optimal trajectory planning.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common], help="plan one problem file")
    s.add_argument("problem", help="YAML problem file")
    s.add_argument("--variants", help="comma-separated subset of " + ",".join(VARIANTS))
    s.add_argument("--no-obstacles", action="store_true", help="ignore the file's obstacles")
    s.add_argument("--seed-only", action="store_true", help="write initial guesses, no solve")
    s.add_argument("--dt", type=float, default=0.05, help="table time step (default: %(default)s)")
    s.set_defaults(func=cmd_solve)

    w = sub.add_parser("sweep", parents=[common], help="weight-factor sweep without bounds")
    w.add_argument("problem", help="YAML problem file")
    w.add_argument("--variants", help="comma-separated subset of " + ",".join(VARIANTS))
    w.add_argument("--no-obstacles", action="store_true")
    w.add_argument("--f-t", type=float, nargs=2, default=(2.0**-6, 2.0**6), metavar=("LO", "HI"))
    w.add_argument("--f-n", type=float, nargs=2, default=(2.0**-6, 2.0**6), metavar=("LO", "HI"))
    w.add_argument("--ratio", type=float, default=4.0, help="geometric step (default: %(default)s)")
    w.set_defaults(func=cmd_sweep)

    b = sub.add_parser("batch", parents=[common], help="reliability batch over radial problems")
    b.add_argument("--grid", choices=("desk", "paper"), default="desk",
                   help="base grid; the options below replace single axes")
    b.add_argument("--lines", help="line angles in degrees, comma-separated")
    b.add_argument("--distances", help="end distances, comma-separated")
    b.add_argument("--orientations", help="end orientations in degrees, comma-separated")
    b.add_argument("--pairs", help="speed:accel pairs, comma-separated")
    b.add_argument("--iteration-limit", type=int, default=200,
                   help="threshold for the solves-within-limit statistic")
    b.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    if args.workers < 1:
        print("comfortplan: error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"comfortplan: {args.problem}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        print(f"comfortplan: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""YAML problem files: schema validation, parsing and serialization.

The accepted document layout is fixed by ``schema/problem-v1.json``.  Every
diagnostic names the offending section and field, e.g. ``start.theta``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .core import BoundaryState, DynamicBounds, PlanningProblem, WeightFactors
from .obstacles import Circle, Ellipse, Rectangle, StarPolygon, make_obstacle

SCHEMA_VERSION = 1
BOUND_KEYS = {
    "curvature": "curvature",
    "speed": "speed",
    "angular_speed": "angular_speed",
    "tangential_acceleration": "tangential_accel",
    "normal_acceleration": "normal_accel",
}


class ProblemFileError(ValueError):
    """Malformed problem file; ``location`` is a dotted path such as ``bounds.speed``."""

    def __init__(self, location: str, message: str):
        self.location = location or "<document>"
        super().__init__(f"{self.location}: {message}")


@dataclass(frozen=True)
class ProblemSpec:
    problem: PlanningProblem
    tolerance: float = 1e-8
    max_iterations: int = 500
    name: str = ""


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files("comfortplan").joinpath(f"schema/problem-v{SCHEMA_VERSION}.json")
    return json.loads(text.read_text())


def _location(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def validate(doc) -> None:
    """Raise :class:`ProblemFileError` for the first schema violation (deepest path first)."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (-len(e.absolute_path), e.message))
    if errors:
        err = errors[0]
        loc = list(err.absolute_path)
        if err.validator == "required":
            missing = err.message.split("'")[1]
            loc.append(missing)
            raise ProblemFileError(_location(loc), "required field is missing")
        raise ProblemFileError(_location(loc), err.message)


def _state(d: dict, section: str) -> BoundaryState:
    try:
        return BoundaryState((d["x"], d["y"]), d["theta"], d.get("kappa", 0.0), d.get("v", 0.0),
                             d.get("a_t", 0.0))
    except ValueError as exc:
        raise ProblemFileError(f"{section}.a_t", str(exc)) from None


def _bounds(d: dict) -> DynamicBounds:
    kw = {}
    for key, attr in BOUND_KEYS.items():
        if key in d:
            kw[attr + "_min"], kw[attr + "_max"] = d[key]
    try:
        return DynamicBounds(**kw)
    except ValueError as exc:
        field = next((k for k, a in BOUND_KEYS.items() if str(exc).startswith(a)), "speed")
        raise ProblemFileError(f"bounds.{field}", str(exc)) from None


def _obstacle(d: dict, i: int):
    kind = d["shape"]
    try:
        if kind == "circle":
            spec = Circle(d["radius"])
        elif kind == "ellipse":
            spec = Ellipse(d["a"], d["b"], d.get("rotation", 0.0))
        elif kind == "rectangle":
            extra = {"smoothing": d["smoothing"]} if "smoothing" in d else {}
            spec = Rectangle(d["half_width"], d["half_height"], d.get("rotation", 0.0), **extra)
        else:
            extra = {"smoothing": d["smoothing"]} if "smoothing" in d else {}
            spec = StarPolygon(tuple(d["radii"]), tuple(d["angles"]), **extra)
    except ValueError as exc:
        raise ProblemFileError(f"obstacles[{i}]", str(exc)) from None
    return make_obstacle(spec, d["center"])


def parse_problem(doc) -> ProblemSpec:
    """Validated document to a :class:`ProblemSpec`."""
    validate(doc)
    start, end = _state(doc["start"], "start"), _state(doc["end"], "end")
    w = doc.get("weights", {})
    disc = doc.get("discretization", {})
    sol = doc.get("solver", {})
    obstacles = [_obstacle(o, i) for i, o in enumerate(doc.get("obstacles", []))]
    bounds = _bounds(doc.get("bounds", {}))
    try:
        problem = PlanningProblem(
            start, end, bounds,
            WeightFactors(w.get("f_t", 1.0), w.get("f_n", 1.0)), obstacles,
            n=disc.get("n", 32), M=disc.get("m", 20), P=disc.get("p", 12),
            min_turn_radius=doc.get("min_turn_radius", 0.55),
            impose_bounds=doc.get("impose_bounds", True),
        )
    except ValueError as exc:
        raise ProblemFileError("end", str(exc)) from None
    return ProblemSpec(problem, sol.get("tol", 1e-8), sol.get("max_iter", 500), doc.get("name", ""))


def load_problem(path) -> ProblemSpec:
    """Read and parse a YAML problem file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ProblemFileError("<file>", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ProblemFileError("<document>", f"not valid YAML: {exc}") from None
    return parse_problem(doc)


def _state_doc(s: BoundaryState) -> dict:
    return {"x": s.position[0], "y": s.position[1], "theta": s.orientation, "kappa": s.curvature,
            "v": s.speed, "a_t": s.tangential_acceleration}


def _obstacle_doc(o) -> dict:
    spec = o.spec
    d = {"center": list(o.center)}
    if isinstance(spec, Circle):
        d.update(shape="circle", radius=spec.radius)
    elif isinstance(spec, Ellipse):
        d.update(shape="ellipse", a=spec.semi_axis_a, b=spec.semi_axis_b, rotation=spec.rotation)
    elif isinstance(spec, Rectangle):
        d.update(shape="rectangle", half_width=spec.half_width, half_height=spec.half_height,
                 rotation=spec.rotation, smoothing=spec.smoothing)
    elif isinstance(spec, StarPolygon):
        d.update(shape="polygon", radii=list(spec.radii), angles=list(spec.angles),
                 smoothing=spec.smoothing)
    else:
        raise TypeError("obstacle has no serializable shape spec")
    return d


def problem_document(spec: ProblemSpec) -> dict:
    """Inverse of :func:`parse_problem`; all defaults are written out."""
    p = spec.problem
    b = p.bounds
    doc = {
        "schema_version": SCHEMA_VERSION,
        "start": _state_doc(p.start),
        "end": _state_doc(p.end),
        "bounds": {k: [getattr(b, a + "_min"), getattr(b, a + "_max")] for k, a in BOUND_KEYS.items()},
        "weights": {"f_t": p.weights.f_T, "f_n": p.weights.f_N},
        "discretization": {"n": p.n, "m": p.M, "p": p.P},
        "min_turn_radius": p.min_turn_radius,
        "impose_bounds": p.impose_bounds,
        "obstacles": [_obstacle_doc(o) for o in p.obstacles],
        "solver": {"tol": spec.tolerance, "max_iter": spec.max_iterations},
    }
    if spec.name:
        doc["name"] = spec.name
    return doc


def dump_problem(spec: ProblemSpec) -> str:
    return yaml.safe_dump(problem_document(spec), sort_keys=False)


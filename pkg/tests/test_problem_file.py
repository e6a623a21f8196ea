import copy

import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from comfortplan.problem_file import (
    ProblemFileError, dump_problem, load_problem, parse_problem, problem_document,
)

BASE = {"schema_version": 1, "start": {"x": 0, "y": 0, "theta": 0},
        "end": {"x": 1, "y": 0, "theta": 0}}


def _edit(fn):
    d = copy.deepcopy(BASE)
    fn(d)
    return d


@pytest.mark.parametrize("name", ["s_shape", "s_shape_obs", "corridor", "quintic"])
def test_fixtures_round_trip(fixtures_dir, name):
    spec = load_problem(fixtures_dir / f"{name}.yaml")
    again = parse_problem(yaml.safe_load(dump_problem(spec)))
    assert problem_document(again) == problem_document(spec)
    assert spec.name == name


def test_defaults():
    spec = parse_problem(BASE)
    p = spec.problem
    assert (p.n, p.M, p.P) == (32, 20, 12)
    assert (p.bounds.curvature_max, p.bounds.speed_max, p.bounds.angular_speed_max) == (1.8, 3.0, 1.57)
    assert (p.bounds.tangential_accel_min, p.bounds.normal_accel_max) == (-1.0, 1.0)
    assert (spec.tolerance, spec.max_iterations) == (1e-8, 500)


@pytest.mark.parametrize("doc,location", [
    (_edit(lambda d: d["start"].pop("theta")), "start.theta"),
    (_edit(lambda d: d.update(bounds={"speed": [0, "fast"]})), "bounds.speed[1]"),
    (_edit(lambda d: d.update(bounds={"speed": [0, 3, 4]})), "bounds.speed"),
    (_edit(lambda d: d.update(bounds={"speed": [0, -1]})), "bounds.speed"),
    (_edit(lambda d: d.update(obstacles=[{"shape": "ellipse", "center": [0, 1], "a": 1}])),
     "obstacles[0].b"),
    (_edit(lambda d: d.update(obstacles=[{"shape": "blob", "center": [0, 1]}])),
     "obstacles[0].shape"),
    (_edit(lambda d: d.update(discretization={"n": 1})), "discretization.n"),
    (_edit(lambda d: d["start"].update(v=0, a_t=1)), "start.a_t"),
    (_edit(lambda d: d.update(weights={"f_t": 0})), "weights.f_t"),
    (_edit(lambda d: d.update(schema_version=2)), "schema_version"),
    ([1, 2], "<document>"),
])
def test_diagnostics_name_section_and_field(doc, location):
    with pytest.raises(ProblemFileError) as err:
        parse_problem(doc)
    assert err.value.location == location
    assert str(err.value).startswith(location + ":")


def test_unknown_field_is_rejected():
    with pytest.raises(ProblemFileError, match="speed"):
        parse_problem(_edit(lambda d: d["start"].update(speed=1)))


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ProblemFileError, match="cannot read"):
        load_problem(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("start: [unclosed\n")
    with pytest.raises(ProblemFileError, match="YAML"):
        load_problem(bad)


@settings(max_examples=30)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-3, 3), st.floats(0, 3),
       st.floats(0.1, 5), st.integers(2, 64))
def test_round_trip_property(x, y, th, v, fn, n):
    doc = _edit(lambda d: d.update(end={"x": x, "y": y + 100.0, "theta": th, "v": v},
                                   weights={"f_t": 1.0, "f_n": fn}, discretization={"n": n}))
    spec = parse_problem(doc)
    assert problem_document(parse_problem(yaml.safe_load(dump_problem(spec)))) == problem_document(spec)

import json

import numpy as np
import pytest

from comfortplan.cli import main

FLAGS = ["--variants", "base_B"]


def _run(tmp_path, name, *extra, fixture="s_shape"):
    from conftest import FIXTURES

    out = tmp_path / name
    code = main(["solve", str(FIXTURES / f"{fixture}.yaml"), "--out", str(out), *extra])
    return code, out


def test_nonexistent_file_exits_one(tmp_path, capsys):
    assert main(["solve", str(tmp_path / "nope.yaml"), "--out", str(tmp_path)]) == 1
    assert "cannot read" in capsys.readouterr().err


def test_malformed_file_names_the_field(tmp_path, capsys):
    f = tmp_path / "p.yaml"
    f.write_text("schema_version: 1\nstart: {x: 0, y: 0}\nend: {x: 1, y: 0, theta: 0}\n")
    assert main(["solve", str(f), "--out", str(tmp_path / "o")]) == 1
    assert "start.theta" in capsys.readouterr().err


def test_bad_flags_exit_one(tmp_path):
    from conftest import FIXTURES

    assert main(["solve", str(FIXTURES / "s_shape.yaml"), "--variants", "sideways",
                 "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as e:
        main(["solve"])
    assert e.value.code == 1


def test_outputs_are_complete(tmp_path):
    code, out = _run(tmp_path, "a", *FLAGS)
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    conv = [v for v in summary["variants"] if v["status"] == "converged"]
    assert summary["best_variant"] == "base_B" and len(conv) == 1
    written = {p.name for p in out.iterdir()}
    for v in summary["variants"]:
        assert set(v["files"].values()) <= written
        if v["status"] == "converged":
            assert {"tau", "J_T", "J_N", "total"} <= set(v)
            table = np.loadtxt(out / v["files"]["trajectory"], delimiter=",", skiprows=1)
            assert table[-1, 1:3] == pytest.approx([-1.0, -4.0], abs=1e-6)
    assert len([n for n in written if n.startswith("trajectory_")]) == len(conv)
    lines = (out / "iterations_base_B.log").read_text().splitlines()
    assert len(lines) == conv[0]["iterations"]
    assert all(json.loads(line)["iteration"] >= 0 for line in lines)


def test_solve_is_deterministic(tmp_path):
    _, a = _run(tmp_path, "a", *FLAGS)
    _, b = _run(tmp_path, "b", *FLAGS)
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for n in names:
        if n == "summary.json":
            sa, sb = (json.loads((d / n).read_text()) for d in (a, b))
            sa.pop("wall_time"), sb.pop("wall_time")
            assert sa == sb
        else:
            assert (a / n).read_bytes() == (b / n).read_bytes()


def test_seed_only(tmp_path):
    code, out = _run(tmp_path, "s", "--seed-only")
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["mode"] == "seed"
    assert all(v["status"] == "seed" for v in summary["variants"])
    assert not list(out.glob("iterations_*"))
    assert len(list(out.glob("trajectory_*.csv"))) == len(summary["variants"])


def test_no_convergence_exits_two(tmp_path):
    code, out = _run(tmp_path, "n", *FLAGS, "--max-iter", "2")
    assert code == 2
    assert json.loads((out / "summary.json").read_text())["best_variant"] is None


def test_no_obstacles_flag(tmp_path):
    code, out = _run(tmp_path, "o", *FLAGS, "--no-obstacles", "--seed-only", fixture="s_shape_obs")
    assert code == 0


def test_empty_batch_grid(tmp_path):
    assert main(["batch", "--lines", "", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "batch.json").read_text())
    assert doc["problems"] == [] and doc["stats"]["problems"] == 0


def test_small_sweep(tmp_path):
    from conftest import FIXTURES

    code = main(["sweep", str(FIXTURES / "s_shape.yaml"), "--f-t", "1", "4", "--f-n", "1", "1",
                 "--variants", "base_B", "--out", str(tmp_path)])
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("f_T,f_N,variant") and len(rows) == 3
    summary = json.loads((tmp_path / "sweep_summary.json").read_text())
    assert summary["cells"] == 2 and summary["convergence_rate"] == 1.0

from pathlib import Path

import numpy as np
import pytest

from comfortplan import BoundaryState, PlanningProblem

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def central_difference(f, x, h=1e-6):
    """Jacobian of ``f`` at ``x`` by central differences (rows follow ``f``)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.stack(cols, -1)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12))


def s_shape(**kw) -> PlanningProblem:
    return PlanningProblem(BoundaryState((0.0, 0.0), 0.0), BoundaryState((-1.0, -4.0), 0.0), **kw)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def s_shape_plan():
    from comfortplan.pipeline import plan

    return plan(s_shape())


# ------------------------------------------------------------ acceptance report
ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    measured = dict(item.user_properties).get("measured", "")
    ACCEPTANCE[mark.args[0]] = (mark.args[1], rep.passed and rep.when == "call", measured)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok, measured = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2} {'PASS' if ok else 'FAIL'}  {title}: {measured}")

from __future__ import annotations

import pytest

from conecert.kernel import DIRICHLET, ROBIN
from conecert.problem import Problem

SYSTEM_F = ["18+sin(u*v)", "exp((u^2+v^2)/25)-1"]


@pytest.fixture
def quadratic_256():
    """u'' + 256 u^2 = 0 with Dirichlet conditions."""
    return Problem.build("lambda*u^2", DIRICHLET, {"lambda": 256})


@pytest.fixture
def coupled_system():
    """The mixed Dirichlet / Dirichlet-Neumann system with f1 = 18 + sin(uv)."""
    return Problem.build(SYSTEM_F, [DIRICHLET, ROBIN])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    results = item.config._criteria.setdefault(number, {"title": title, "outcomes": []})
    results["outcomes"].append(report.outcome)


def pytest_terminal_summary(terminalreporter, config):
    table = getattr(config, "_criteria", {})
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        entry = table[number]
        ok = all(o == "passed" for o in entry["outcomes"])
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {entry['title']}")

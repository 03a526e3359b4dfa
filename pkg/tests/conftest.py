from __future__ import annotations

import pytest

from arbiter.scenario import load_scenario, prepare
from arbiter.selector import Strategy
from arbiter.sim import run_simulation
from arbiter.track import parse_track

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


L_TRACK = """\
. S0
S1 L1
"""


@pytest.fixture
def l_track():
    return parse_track(L_TRACK)


@pytest.fixture(scope="session")
def benchmark():
    return prepare(load_scenario("benchmark"))


def run_benchmark(strategy: Strategy, **selector):
    sc = load_scenario("benchmark")
    sc.selector["strategy"] = strategy.value
    sc.selector.update({k: str(v) for k, v in selector.items()})
    p = prepare(sc)
    return run_simulation(p.track, p.route, p.selector, p.behavior, p.vehicle, p.sim, p.start)


@pytest.fixture(scope="session")
def benchmark_runs():
    return {s: run_benchmark(s) for s in Strategy}

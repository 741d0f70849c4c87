from __future__ import annotations

import pytest

from ivkkt.kkt import ProbeSet
from ivkkt.problem import load_problem

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(criterion: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        lines.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mivop3():
    return load_problem("mivop3")


@pytest.fixture(scope="session")
def mivop4():
    return load_problem("mivop4")


@pytest.fixture(scope="session")
def mivop5():
    return load_problem("mivop5")


@pytest.fixture(scope="session")
def relaxed():
    return load_problem("relaxed_mivop3")


@pytest.fixture(scope="session")
def probes3(mivop3):
    return ProbeSet.sample(mivop3, mivop3.candidate, 200)


@pytest.fixture(scope="session")
def probes4(mivop4):
    return ProbeSet.sample(mivop4, mivop4.candidate, 200)


@pytest.fixture(scope="session")
def probes5(mivop5):
    return ProbeSet.sample(mivop5, mivop5.candidate, 200)

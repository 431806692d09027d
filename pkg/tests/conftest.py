"""Shared, expensive data: computed once per session and reused across modules."""

import sys
from pathlib import Path

import pytest

from popstack import asymptotics, modular
from popstack.bfile import read_bfile
from popstack.series import SeriesTerms, egf

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def table1():
    offset, values = read_bfile(DATA / "table1.b")
    assert offset == 1 and len(values) == 45
    return values


@pytest.fixture(scope="session")
def totals300():
    return modular.count_parallel(300)


@pytest.fixture(scope="session")
def counts300(totals300):
    return SeriesTerms.from_counts(totals300)


@pytest.fixture(scope="session")
def runs300():
    return modular.count_by_runs_parallel(300, 10)


@pytest.fixture(scope="session")
def analyses(counts300):
    """Default-grid analyses of the EGF from 100, 200 and all 300 counts."""
    e = egf(counts300)
    return {n: asymptotics.analyze(e.truncated(n + 1)) for n in (100, 200, 300)}


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

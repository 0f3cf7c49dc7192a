from pathlib import Path

import pytest

from taxoenrich.taxonomy import build_taxonomy, load_taxonomy

DATA = Path(__file__).parent / "data"

# cruise fixture ids
ENT_JOURNEY, JOURNEY, TOUR, TRAVEL, ENTERTAINMENT, ACTIVE_LEISURE, MOVE = (
    f"{i}-N" for i in range(101, 108)
)


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def cruise():
    with open(DATA / "cruise.tsv", encoding="utf-8") as fh:
        return load_taxonomy(fh)


@pytest.fixture
def figure1a():
    with open(DATA / "figure1a.tsv", encoding="utf-8") as fh:
        return load_taxonomy(fh)


@pytest.fixture
def chain():
    """c -> b -> a"""
    return build_taxonomy(
        [("a", "a", ["alpha"]), ("b", "b", ["beta"]), ("c", "c", ["gamma"])],
        [("c", "b"), ("b", "a")],
    )


_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{mark}  {name}")

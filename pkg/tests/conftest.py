from __future__ import annotations

import sys

import pytest

from curtainlab.hhs import instantiate_tree_of_flats
from curtainlab.raag import build_window, f2_times_z, free_abelian, free_group


@pytest.fixture(scope="session")
def tof6():
    """Tree-of-flats window of radius 6 with its projection system."""
    return instantiate_tree_of_flats(6)


@pytest.fixture(scope="session")
def tof8():
    """Radius-8 tree-of-flats window; the largest one the suite builds (about 50 s)."""
    return instantiate_tree_of_flats(8)


@pytest.fixture(scope="session")
def f2_ball6():
    return build_window(free_group(), 6)


@pytest.fixture(scope="session")
def z2_ball6():
    return build_window(free_abelian(), 6)


@pytest.fixture(scope="session")
def f2xz_ball6():
    return build_window(f2_times_z(), 6)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("tests.test_acceptance")
    verdicts = getattr(module, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in sorted(verdicts):
            terminalreporter.write_line(line)

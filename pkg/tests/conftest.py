import sys

import pytest

from robinweyl.geometry import make_circle, make_ellipse, make_star


@pytest.fixture(scope="session")
def circle():
    return make_circle(1.0)


@pytest.fixture(scope="session")
def ellipse():
    return make_ellipse(2.0, 1.0)


@pytest.fixture(scope="session")
def star():
    return make_star(1.0, 0.1, 3)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])

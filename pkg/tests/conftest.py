import pytest

from vvteam.model import FITTING_PARAMS, TESTING_PARAMS
from vvteam.simulator import make_stimulus

# 3 V set pulse, then release at -1 V (apply-then-release shape).
PULSE_SEGMENTS = [(20e-3, 3.0), (80e-3, -1.0)]


@pytest.fixture
def testing():
    return TESTING_PARAMS


@pytest.fixture
def fitting():
    return FITTING_PARAMS


@pytest.fixture
def pulse_stimulus():
    return make_stimulus(PULSE_SEGMENTS, 10e-6)


_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    param = f"[{item.callspec.id}]" if hasattr(item, "callspec") else ""
    measured = ", ".join(f"{k}={v}" for k, v in item.user_properties)
    _criteria.append((number, f"{title}{param}", call.excinfo is None, measured))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, measured in _criteria:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  ({measured})" if measured else ""))

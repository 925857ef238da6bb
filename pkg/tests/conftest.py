import math

import pytest

from trailer_jackknife.kinematics import SideslipState, VehicleTrailerParams


@pytest.fixture
def long_trailer():
    return VehicleTrailerParams(wheelbase=3.0, hitch_length=1.23, tongue_length=2.51,
                                kappa_min=-0.1761, kappa_max=0.1761)


@pytest.fixture
def short_trailer():
    return VehicleTrailerParams(wheelbase=3.0, hitch_length=2.0, tongue_length=1.0,
                                kappa_min=-1.761, kappa_max=1.761)


@pytest.fixture
def medium_fig8():
    p = VehicleTrailerParams(wheelbase=3.0, hitch_length=1.23, tongue_length=1.25,
                             steering_wheel_limit=math.radians(1400.0))
    return p, SideslipState.degrees(0.0, 30.0, 30.0)


@pytest.fixture
def zero_slip():
    return SideslipState.zero()


_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record one verdict line for an acceptance criterion."""
    def record(number: int, title: str, passed: bool, detail: str):
        _ACCEPTANCE[number] = (title, passed, detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}")

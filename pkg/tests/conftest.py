import os

import pytest
from hypothesis import HealthCheck, settings

from rigorquad.interval import ROUNDING_MODES, hardware_rounding_available, use_rounding

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.register_profile("thorough", deadline=None, max_examples=2000,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

AVAILABLE_MODES = [m for m in ROUNDING_MODES if m != "hardware" or hardware_rounding_available()]


@pytest.fixture(params=AVAILABLE_MODES)
def rounding(request):
    """Run the test once per available directed-rounding realization."""
    with use_rounding(request.param):
        yield request.param


CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``."""

    def record(number: int, ok: bool | None, detail: str):
        word = "NOT RUN" if ok is None else ("PASS" if ok else "FAIL")
        CRITERIA[number] = f"criterion {number}: {word}  {detail}"
        print(CRITERIA[number])

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for n in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[n])

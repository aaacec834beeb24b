import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("percwalk", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("percwalk")

_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    def check(number, ok, detail):
        _LINES.append((number, bool(ok), detail))
        assert ok, f"criterion {number}: {detail}"
    return check


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}")

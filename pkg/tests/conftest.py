import numpy as np
import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def record():
    """Log one acceptance line; the summary hook prints them in order."""

    def _record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (passed, detail)

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from paralink.model import make_scenario  # noqa: E402


@pytest.fixture
def three_links():
    """Success probabilities (0.9, 0.8, 0.7), worths (2, 1)."""
    return make_scenario([0.1, 0.2, 0.3], [2.0, 1.0])


@pytest.fixture
def three_links_one_msg():
    return make_scenario([0.1, 0.2, 0.3], [1.0])


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def record_acceptance(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])

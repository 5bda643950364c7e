import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# acceptance criterion number -> (passed, title, detail)
CRITERIA: dict[int, tuple[bool, str, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion.

    Usage: ``with criterion(3, "Hilbert order") as rec: ...; rec.detail = ...``
    """
    class Recorder:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            ok = exc_type is None
            detail = self.detail if ok else f"{self.detail} {exc}".strip()
            prev = CRITERIA.get(self.number)
            if prev is not None:
                ok = ok and prev[0]
                detail = f"{prev[2]}; {detail}" if prev[2] else detail
            CRITERIA[self.number] = (ok, self.title, detail)
            return False

    return Recorder


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, title, detail = CRITERIA[number]
        text = f"{title}: {detail}" if detail else title
        terminalreporter.write_line(
            f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {text}")

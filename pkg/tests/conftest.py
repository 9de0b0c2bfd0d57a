from __future__ import annotations

import pytest

# criterion number -> list of (passed, detail)
_CRITERIA: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion():
    """Record one checked part of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> bool:
        _CRITERIA.setdefault(number, []).append((bool(passed), detail))
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        parts = _CRITERIA[number]
        status = "PASS" if all(ok for ok, _ in parts) else "FAIL"
        details = "; ".join(d if ok else f"[FAIL] {d}" for ok, d in parts)
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {details}")

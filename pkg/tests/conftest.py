from __future__ import annotations

import numpy as np
import pytest

THETA = np.array([0.8, 0.3, 0.4])


@pytest.fixture
def theta() -> np.ndarray:
    return THETA.copy()


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion under its number."""
    number = request.node.get_closest_marker("criterion").args[0]
    notes: list[str] = []
    yield notes
    failed = getattr(request.node, "rep_call", None) is None or request.node.rep_call.failed
    ACCEPTANCE[number] = (not failed, "; ".join(notes))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, note = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {note}")

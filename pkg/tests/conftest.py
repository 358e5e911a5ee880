from __future__ import annotations

import time

import pytest

from helmray import ScenarioConfig, run_scenario

_CRITERIA: dict[int, str] = {}


@pytest.fixture(scope="session")
def gaussian_bundle():
    """The canonical Gaussian run (201 rays, +-4 w0, three Rayleigh lengths),
    stored at every step."""
    start = time.perf_counter()
    bundle = run_scenario(ScenarioConfig(snapshot_every=1))
    bundle.elapsed = time.perf_counter() - start
    return bundle


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""

    def record(number: int, ok: bool, detail: str) -> None:
        _CRITERIA[number] = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])

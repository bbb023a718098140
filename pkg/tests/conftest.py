"""Shared fixtures and the acceptance summary hook.

The ``criterion`` fixture records one line per acceptance check; the
terminal summary prints them as a block after the test counts so a run
of ``pytest`` ends with an explicit pass/fail line for every criterion.
"""
from __future__ import annotations

import numpy as np
import pytest

from projbalance import PointCloud


@pytest.fixture(scope="session")
def iris_cloud() -> PointCloud:
    from sklearn.datasets import load_iris

    data = load_iris().data  # 150 x 4; one duplicated row pair
    return PointCloud(data, on_coincident="drop")


@pytest.fixture(scope="session")
def small_cloud() -> PointCloud:
    rng = np.random.default_rng(7)
    return PointCloud(rng.standard_normal((12, 6)))


@pytest.fixture
def criterion(request):
    lines = request.config.__dict__.setdefault("_criterion_lines", [])

    def record(number: int, passed: bool, detail: str) -> None:
        status = "PASS" if passed else "FAIL"
        lines.append(f"criterion {number:2d}: {status} - {detail}")
        assert passed, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

from cofrag import build_cartesian_mesh, build_kernel_tables, build_size_grid  # noqa: E402
from cofrag.size_grid import constant_diffusion, constant_rate  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_grid3():
    return build_size_grid(3.0, 3)


@pytest.fixture
def ones_tables3(unit_grid3):
    return build_kernel_tables(unit_grid3, constant_rate(1.0), constant_rate(1.0), constant_diffusion(1.0))


@pytest.fixture
def single_cell():
    return build_cartesian_mesh((0.0, 1.0), (0.0, 1.0), 1, 1)


ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def report(number: int, title: str, passed: bool, detail: str) -> bool:
    """Record the outcome of an acceptance criterion for the end-of-run summary."""
    ACCEPTANCE[number] = (title, bool(passed), detail)
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")

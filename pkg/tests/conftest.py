import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sfl_pohozaev import GridMask, disk_basis, grid_basis, interval_basis, rectangle_basis  # noqa: E402

PI = np.pi


@pytest.fixture(scope="session")
def interval64():
    return interval_basis(0.0, PI, 64)


@pytest.fixture(scope="session")
def square64():
    return rectangle_basis(0.0, PI, 0.0, PI, 64)


@pytest.fixture(scope="session")
def disk32():
    return disk_basis(1.0, 32)


@pytest.fixture(scope="session")
def unit_grid():
    return GridMask.rectangle(1.0, 1.0, 1 / 64)


@pytest.fixture(scope="session")
def grid32(unit_grid):
    return grid_basis(unit_grid, 32)


@pytest.fixture(scope="session")
def small_bases():
    return {
        "interval": interval_basis(0.0, PI, 16),
        "square": rectangle_basis(0.0, PI, 0.0, PI, 16),
        "disk": disk_basis(1.0, 16),
        "grid": grid_basis(GridMask.rectangle(1.0, 1.0, 1 / 16), 16),
    }


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(results.items()):
            terminalreporter.write_line(line)

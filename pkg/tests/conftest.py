import numpy as np
import pytest

from gridrover.terrain import HeightField


def flat_field(rows=10, cols=10, cell_size=1.0, height=0.0):
    return HeightField(rows, cols, cell_size,
                       np.full((rows, cols), height, dtype=np.float64))


def ramp_field(rows, cols, cell_size=1.0, slope_per_cell=0.1):
    """Heights rise by slope_per_cell per column, flat along rows."""
    heights = np.tile(np.arange(cols, dtype=np.float64) * slope_per_cell, (rows, 1))
    return HeightField(rows, cols, cell_size, heights)


@pytest.fixture
def flat10():
    return flat_field(10, 10)


# Acceptance criteria report lines, printed after the run so they show up
# even when pytest captures stdout.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)

"""Compass conventions shared by the whole package.

Directions are indexed 0..7 clockwise starting at North:

    0 N   1 NE   2 E   3 SE   4 S   5 SW   6 W   7 NW

Rows grow southward and columns grow eastward, so North is row-1.
Headings are the same indices; heading k points along direction k and
corresponds to 45*k degrees.  Continuous coordinates put cell (r, c)'s
center at x = (c + 0.5) * cell_size, y = (r + 0.5) * cell_size, with y
growing southward to match row order.
"""

import math

COMPASS = ("N", "NE", "E", "SE", "S", "SW", "W", "NW")

DROW = (-1, -1, 0, 1, 1, 1, 0, -1)
DCOL = (0, 1, 1, 1, 0, -1, -1, -1)

SQRT2 = math.sqrt(2.0)

# Step length in cell units for each direction (1 cardinal, sqrt(2) diagonal).
STEP_UNITS = (1.0, SQRT2, 1.0, SQRT2, 1.0, SQRT2, 1.0, SQRT2)

# Minimum number of 45-degree increments to rotate between two headings,
# indexed by (to - from) mod 8.
TURN_BY_OFFSET = (0, 1, 2, 3, 4, 3, 2, 1)

_NAME_TO_INDEX = {name: i for i, name in enumerate(COMPASS)}


def heading_index(value):
    """Normalize a heading given as an index 0..7 or a compass name."""
    if isinstance(value, str):
        name = value.strip().upper()
        if name not in _NAME_TO_INDEX:
            raise ValueError(f"unknown heading {value!r}; use one of {COMPASS}")
        return _NAME_TO_INDEX[name]
    idx = int(value)
    if not 0 <= idx <= 7:
        raise ValueError(f"heading index {value!r} outside 0..7")
    return idx


def heading_name(index):
    return COMPASS[index % 8]


def heading_degrees(index):
    """Heading as degrees clockwise from North."""
    return 45.0 * (index % 8)


def turn_increments(from_heading, to_heading):
    """Number of 45-degree increments in the shorter rotation direction."""
    return TURN_BY_OFFSET[(to_heading - from_heading) % 8]


def direction_between(from_cell, to_cell):
    """Direction index for a move between 8-adjacent cells.

    Returns None when the cells are not adjacent (or are equal).
    """
    dr = to_cell[0] - from_cell[0]
    dc = to_cell[1] - from_cell[1]
    for k in range(8):
        if DROW[k] == dr and DCOL[k] == dc:
            return k
    return None

"""Grid decomposition, cell state machine, and the sensing model.

Each cell is in one of four states:

    Unknown  -> never observed
    Free     -> sensed traversable
    Obstacle -> sensed blocked (rock footprint or slope over the limit)
    Visited  -> entered by the rover at least once

Legal transitions: Unknown->Free, Unknown->Obstacle, Free->Visited,
Free->Obstacle (a detour-planning failure reclassifies a cell).  Obstacle
is terminal, no cell ever returns to Unknown, and revisiting a Visited
cell only increments its visit count.  Every transition is appended to
``transition_log`` as ((row, col), from_state, to_state).

Rocks are continuous disc footprints laid over the grid; a cell is
rock-blocked when its square intersects any disc.  The rover senses only
its 8 neighbors: a neighbor classifies as Obstacle when it is
rock-blocked or when the center-to-center slope exceeds the slope limit.
"""

import math
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .directions import DCOL, DROW, STEP_UNITS, heading_index
from .errors import (
    IllegalTransition,
    IllegalVisit,
    OutOfBounds,
    StartBlocked,
    TooManyObstacles,
)


class CellState(IntEnum):
    UNKNOWN = 0
    FREE = 1
    OBSTACLE = 2
    VISITED = 3


# Snapshot characters, indexed by CellState value.
SNAPSHOT_CHARS = "?.#+"

_LEGAL_TRANSITIONS = {
    (CellState.UNKNOWN, CellState.FREE),
    (CellState.UNKNOWN, CellState.OBSTACLE),
    (CellState.FREE, CellState.VISITED),
    (CellState.FREE, CellState.OBSTACLE),
}


class Disc(NamedTuple):
    """Continuous obstacle footprint: center (meters) and radius (meters)."""

    x: float
    y: float
    r: float


@dataclass
class RoverState:
    """Rover bookkeeping: occupied cell, heading index, continuous pose.

    pose is (x, y, theta_deg) with theta degrees clockwise from North.
    """

    cell: tuple
    heading: int
    pose: tuple


class GridWorld:
    """Mutable episode world: cell states, visit counts, rock footprints."""

    def __init__(self, field, rocks=(), slope_limit=25.0):
        if not (0.0 < slope_limit < 90.0):
            raise ValueError(f"slope_limit must be in (0, 90) degrees, got {slope_limit}")
        self.field = field
        self.slope_limit = float(slope_limit)
        self.tan_slope_limit = math.tan(math.radians(self.slope_limit))
        n = field.rows * field.cols
        self.states = np.zeros(n, dtype=np.int8)
        self.visit_counts = np.zeros(n, dtype=np.int64)
        self.rocks = []
        self.rock_blocked = np.zeros(n, dtype=np.uint8)
        self.transition_log = []
        for rock in rocks:
            self.add_rock(rock)

    # -- geometry ----------------------------------------------------------

    @property
    def rows(self):
        return self.field.rows

    @property
    def cols(self):
        return self.field.cols

    @property
    def cell_size(self):
        return self.field.cell_size

    @property
    def n_cells(self):
        return self.field.rows * self.field.cols

    def cell_index(self, cell):
        r, c = cell
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise OutOfBounds(f"cell {cell} outside {self.rows}x{self.cols} grid")
        return r * self.cols + c

    def index_cell(self, idx):
        return (idx // self.cols, idx % self.cols)

    def cell_center(self, cell):
        r, c = cell
        cs = self.cell_size
        return ((c + 0.5) * cs, (r + 0.5) * cs)

    def add_rock(self, rock):
        """Register a disc footprint and mark the cells it intersects.

        Does not touch cell states; a rock only becomes an Obstacle cell
        when the rover senses it.
        """
        rock = Disc(float(rock[0]), float(rock[1]), float(rock[2]))
        if rock.r <= 0.0:
            raise ValueError(f"rock radius must be > 0, got {rock.r}")
        self.rocks.append(rock)
        cs = self.cell_size
        r0 = max(0, int(math.floor((rock.y - rock.r) / cs)))
        r1 = min(self.rows - 1, int(math.floor((rock.y + rock.r) / cs)))
        c0 = max(0, int(math.floor((rock.x - rock.r) / cs)))
        c1 = min(self.cols - 1, int(math.floor((rock.x + rock.r) / cs)))
        for r in range(r0, r1 + 1):
            for c in range(c0, c1 + 1):
                # Nearest point of the cell square to the disc center.
                nx = min(max(rock.x, c * cs), (c + 1) * cs)
                ny = min(max(rock.y, r * cs), (r + 1) * cs)
                if (nx - rock.x) ** 2 + (ny - rock.y) ** 2 <= rock.r * rock.r:
                    self.rock_blocked[r * self.cols + c] = 1

    # -- state machine -----------------------------------------------------

    def state_of(self, cell):
        return CellState(int(self.states[self.cell_index(cell)]))

    def visit_count(self, cell):
        return int(self.visit_counts[self.cell_index(cell)])

    def visited_count(self):
        """Number of distinct Visited cells."""
        return int(np.count_nonzero(self.states == CellState.VISITED))

    def _set_state(self, idx, new_state):
        old = CellState(int(self.states[idx]))
        new = CellState(new_state)
        if (old, new) not in _LEGAL_TRANSITIONS:
            raise IllegalTransition(
                f"cell {self.index_cell(idx)}: {old.name} -> {new.name} is not a legal transition"
            )
        self.states[idx] = new
        self.transition_log.append((self.index_cell(idx), old, new))

    def mark_free(self, cell):
        """Observe a cell as traversable (Unknown -> Free)."""
        self._set_state(self.cell_index(cell), CellState.FREE)

    def mark_obstacle(self, cell):
        """Classify a cell as blocked (from Unknown or Free)."""
        self._set_state(self.cell_index(cell), CellState.OBSTACLE)

    def visit(self, cell):
        """Enter a cell: Free -> Visited, or bump the revisit count."""
        idx = self.cell_index(cell)
        s = CellState(int(self.states[idx]))
        if s == CellState.FREE:
            self._set_state(idx, CellState.VISITED)
        elif s != CellState.VISITED:
            raise IllegalVisit(f"cannot visit cell {cell} in state {s.name}")
        self.visit_counts[idx] += 1

    # -- sensing -----------------------------------------------------------

    def sense(self, rover):
        """Classify the 8 neighbors of the rover's cell.

        Unknown neighbors transition to Free or Obstacle; known neighbors
        are never reclassified.  Returns [((row, col), CellState), ...] in
        compass order (N first, clockwise), skipping off-grid neighbors.
        Idempotent: a second call from the same cell changes nothing.
        """
        cell = rover.cell if hasattr(rover, "cell") else tuple(rover)
        idx = self.cell_index(cell)
        r0, c0 = cell
        h0 = self.field.heights[idx]
        out = []
        for k in range(8):
            nr = r0 + DROW[k]
            nc = c0 + DCOL[k]
            if not (0 <= nr < self.rows and 0 <= nc < self.cols):
                continue
            ni = nr * self.cols + nc
            dh = self.field.heights[ni] - h0
            if dh < 0.0:
                dh = -dh
            # Same comparison the stepping kernels use: slope test on the
            # tangent, threshold per step geometry.
            thr = self.tan_slope_limit * (STEP_UNITS[k] * self.cell_size)
            blocked = bool(self.rock_blocked[ni]) or dh > thr
            cls = CellState.OBSTACLE if blocked else CellState.FREE
            if self.states[ni] == CellState.UNKNOWN:
                self._set_state(ni, cls)
            out.append(((nr, nc), cls))
        return out

    # -- reachability ------------------------------------------------------

    def reachable_free_cells(self, start):
        """Count cells reachable from start by 8-connected traversable moves.

        Ground truth (ignores current knowledge states): a move is
        traversable when the destination is not rock-blocked and the
        center-to-center slope is within the limit.  Includes the start
        cell itself.

        Raises:
            StartBlocked: the start cell is covered by a rock.
        """
        start_idx = self.cell_index(start)
        if self.rock_blocked[start_idx]:
            raise StartBlocked(f"start cell {tuple(start)} is covered by an obstacle")
        heights = self.field.heights
        seen = np.zeros(self.n_cells, dtype=bool)
        seen[start_idx] = True
        queue = deque([start_idx])
        count = 0
        while queue:
            idx = queue.popleft()
            count += 1
            r, c = idx // self.cols, idx % self.cols
            h0 = heights[idx]
            for k in range(8):
                nr = r + DROW[k]
                nc = c + DCOL[k]
                if not (0 <= nr < self.rows and 0 <= nc < self.cols):
                    continue
                ni = nr * self.cols + nc
                if seen[ni] or self.rock_blocked[ni]:
                    continue
                dh = heights[ni] - h0
                if dh < 0.0:
                    dh = -dh
                thr = self.tan_slope_limit * (STEP_UNITS[k] * self.cell_size)
                if dh > thr:
                    continue
                seen[ni] = True
                queue.append(ni)
        return count

    # -- export ------------------------------------------------------------

    def snapshot(self):
        """Cell states as text: '?' Unknown, '.' Free, '#' Obstacle, '+' Visited.

        One row per line, row-major, LF line endings.
        """
        table = np.frombuffer(SNAPSHOT_CHARS.encode("ascii"), dtype=np.uint8)
        chars = table[self.states].reshape(self.rows, self.cols)
        return "\n".join(bytes(row).decode("ascii") for row in chars) + "\n"


def snapshot_to_states(text):
    """Parse snapshot text back into an int8 state array of shape (rows, cols)."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError("empty snapshot")
    cols = len(lines[0])
    if any(len(ln) != cols for ln in lines):
        raise ValueError("snapshot rows have unequal lengths")
    lookup = {ch: i for i, ch in enumerate(SNAPSHOT_CHARS)}
    out = np.zeros((len(lines), cols), dtype=np.int8)
    for r, ln in enumerate(lines):
        for c, ch in enumerate(ln):
            if ch not in lookup:
                raise ValueError(f"unknown snapshot character {ch!r}")
            out[r, c] = lookup[ch]
    return out


def make_rover(world, cell, heading):
    """RoverState at a cell center with a normalized heading."""
    h = heading_index(heading)
    x, y = world.cell_center(cell)
    return RoverState(cell=tuple(cell), heading=h, pose=(x, y, 45.0 * h))


def decompose(field, obstacle_fraction, seed, start_cell=(0, 0), slope_limit=25.0):
    """Build a GridWorld with seeded random rock placement.

    Exactly floor(obstacle_fraction * n_cells) distinct cells receive one
    rock each, never the start cell.  Each rock is a disc strictly inside
    its cell (radius 0.25..0.45 cells, center jittered so the disc does
    not cross the cell boundary), so neighboring cell centers keep enough
    clearance for the default detour standoff.  Same seed, same rocks.

    Raises:
        TooManyObstacles: fraction leaves no room besides the start cell.
    """
    if not (0.0 <= obstacle_fraction < 1.0):
        raise ValueError(f"obstacle_fraction must be in [0, 1), got {obstacle_fraction}")
    world = GridWorld(field, slope_limit=slope_limit)
    n = world.n_cells
    start_idx = world.cell_index(start_cell)
    count = int(math.floor(obstacle_fraction * n))
    if count > n - 1:
        raise TooManyObstacles(
            f"{count} obstacles cannot leave start cell clear on a {n}-cell grid"
        )
    if count == 0:
        return world
    rng = np.random.default_rng(seed)
    pool = np.delete(np.arange(n, dtype=np.int64), start_idx)
    chosen = rng.choice(pool, size=count, replace=False)
    cs = field.cell_size
    radii = rng.uniform(0.25, 0.45, size=count) * cs
    slack = np.maximum(0.48 * cs - radii, 0.0)
    offsets = rng.uniform(-1.0, 1.0, size=(count, 2)) * slack[:, None]
    for i in range(count):
        r, c = int(chosen[i]) // field.cols, int(chosen[i]) % field.cols
        cx = (c + 0.5) * cs + offsets[i, 0]
        cy = (r + 0.5) * cs + offsets[i, 1]
        world.add_rock(Disc(cx, cy, float(radii[i])))
    return world

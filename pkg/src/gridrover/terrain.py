"""Raster heightfields and a procedural DEM-analog generator.

A heightfield is a row-major grid of cell-center elevations in meters.
The text format is deliberately minimal so fields round-trip exactly:

    # optional comments anywhere, '#' to end of line skipped
    rows cols cell_size
    h h h ... (cols values)     one line per row, rows lines total

Terrain is synthesized by superimposing parabolic-profile craters,
Gaussian hills, and low-amplitude value noise on a flat base.  Rocks in a
TerrainSpec do not alter the heightfield; they are continuous disc
footprints consumed by the grid world and the continuous avoidance layer.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidSpec,
    MalformedHeader,
    NonFiniteValue,
    NotAdjacent,
    OutOfBounds,
)

# Lattice pitch of the value noise, in cells.
NOISE_LATTICE_PITCH = 8


@dataclass(frozen=True)
class HeightField:
    """Immutable elevation raster.

    Attributes:
        rows, cols: grid dimensions, at least 1x1.
        cell_size: cell edge length in meters, > 0.
        heights: float64 array of shape (rows*cols,), row-major, read-only.
    """

    rows: int
    cols: int
    cell_size: float
    heights: np.ndarray

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidSpec(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not (self.cell_size > 0.0) or not math.isfinite(self.cell_size):
            raise InvalidSpec(f"cell_size must be a positive finite number, got {self.cell_size}")
        arr = np.ascontiguousarray(self.heights, dtype=np.float64).reshape(-1)
        if arr.size != self.rows * self.cols:
            raise DimensionMismatch(
                f"expected {self.rows * self.cols} heights, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFiniteValue("heightfield contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "heights", arr)
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        object.__setattr__(self, "cell_size", float(self.cell_size))

    @property
    def n_cells(self):
        return self.rows * self.cols

    def grid(self):
        """Heights as a read-only (rows, cols) view."""
        return self.heights.reshape(self.rows, self.cols)


class Crater(NamedTuple):
    """Bowl depression: center (meters), rim radius (meters), depth (meters)."""

    cx: float
    cy: float
    radius: float
    depth: float


class Hill(NamedTuple):
    """Gaussian mound: center (meters), sigma (meters), peak height (meters)."""

    cx: float
    cy: float
    sigma: float
    height: float


class Rock(NamedTuple):
    """Continuous disc footprint: center (meters), radius (meters)."""

    cx: float
    cy: float
    radius: float


@dataclass(frozen=True)
class TerrainSpec:
    """Parameters for generate_terrain.

    Feature coordinates are in meters in the same frame as cell centers.
    """

    rows: int
    cols: int
    cell_size: float
    base_height: float = 0.0
    craters: tuple = ()
    hills: tuple = ()
    rocks: tuple = ()
    noise_amplitude: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise InvalidSpec(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not (self.cell_size > 0.0):
            raise InvalidSpec(f"cell_size must be > 0, got {self.cell_size}")
        if self.noise_amplitude < 0.0:
            raise InvalidSpec(f"noise_amplitude must be >= 0, got {self.noise_amplitude}")
        craters = tuple(Crater(*c) for c in self.craters)
        hills = tuple(Hill(*h) for h in self.hills)
        rocks = tuple(Rock(*r) for r in self.rocks)
        for c in craters:
            if c.radius <= 0.0 or c.depth < 0.0:
                raise InvalidSpec(f"crater needs radius > 0 and depth >= 0, got {c}")
        for h in hills:
            if h.sigma <= 0.0 or h.height < 0.0:
                raise InvalidSpec(f"hill needs sigma > 0 and height >= 0, got {h}")
        for r in rocks:
            if r.radius <= 0.0:
                raise InvalidSpec(f"rock needs radius > 0, got {r}")
        object.__setattr__(self, "craters", craters)
        object.__setattr__(self, "hills", hills)
        object.__setattr__(self, "rocks", rocks)
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "base_height", float(self.base_height))
        object.__setattr__(self, "noise_amplitude", float(self.noise_amplitude))
        object.__setattr__(self, "seed", int(self.seed))


# ---------------------------------------------------------------------------
# text format


def load_heightfield(source):
    """Parse a heightfield from a text stream or a string.

    Raises MalformedHeader, DimensionMismatch, or NonFiniteValue; messages
    name the offending physical line.
    """
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source

    header = None
    header_line = 0
    data = []
    data_lines_seen = 0
    expected_cols = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if len(tokens) != 3:
                raise MalformedHeader(
                    f"line {line_no}: header needs 'rows cols cell_size', got {len(tokens)} tokens"
                )
            try:
                rows = int(tokens[0])
                cols = int(tokens[1])
                cell_size = float(tokens[2])
            except ValueError:
                raise MalformedHeader(f"line {line_no}: cannot parse header {line!r}") from None
            if rows < 1 or cols < 1:
                raise MalformedHeader(f"line {line_no}: grid must be at least 1x1, got {rows}x{cols}")
            if not (cell_size > 0.0) or not math.isfinite(cell_size):
                raise MalformedHeader(f"line {line_no}: cell_size must be > 0, got {tokens[2]}")
            header = (rows, cols, cell_size)
            header_line = line_no
            expected_cols = cols
            continue
        if data_lines_seen >= header[0]:
            raise DimensionMismatch(
                f"line {line_no}: expected {header[0]} data rows, found extra data"
            )
        if len(tokens) != expected_cols:
            raise DimensionMismatch(
                f"line {line_no}: expected {expected_cols} values, got {len(tokens)}"
            )
        row_vals = []
        for tok in tokens:
            try:
                v = float(tok)
            except ValueError:
                raise NonFiniteValue(f"line {line_no}: {tok!r} is not a finite number") from None
            if not math.isfinite(v):
                raise NonFiniteValue(f"line {line_no}: {tok!r} is not a finite number")
            row_vals.append(v)
        data.extend(row_vals)
        data_lines_seen += 1

    if header is None:
        raise MalformedHeader("line 1: empty input, header 'rows cols cell_size' required")
    if data_lines_seen != header[0]:
        raise DimensionMismatch(
            f"line {header_line}: header declares {header[0]} rows, found {data_lines_seen}"
        )
    return HeightField(header[0], header[1], header[2], np.array(data, dtype=np.float64))


def write_heightfield(field, stream):
    """Write the text form; %.6g values, LF line endings."""
    stream.write(f"{field.rows} {field.cols} {field.cell_size:.6g}\n")
    grid = field.grid()
    for r in range(field.rows):
        stream.write(" ".join(f"{v:.6g}" for v in grid[r]) + "\n")


def dump_heightfield(field):
    """Text form as a string."""
    lines = [f"{field.rows} {field.cols} {field.cell_size:.6g}"]
    grid = field.grid()
    for r in range(field.rows):
        lines.append(" ".join(f"{v:.6g}" for v in grid[r]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# procedural generation


def generate_terrain(spec):
    """Synthesize a HeightField from a TerrainSpec.

    Deterministic for a given spec: the only random input is the value
    noise, drawn in one call from a generator seeded with spec.seed.
    Features superimpose additively, so a zero-depth crater or zero-height
    hill leaves the field unchanged.
    """
    rows, cols, cs = spec.rows, spec.cols, spec.cell_size
    xs = (np.arange(cols, dtype=np.float64) + 0.5) * cs
    ys = (np.arange(rows, dtype=np.float64) + 0.5) * cs
    X, Y = np.meshgrid(xs, ys)
    H = np.full((rows, cols), spec.base_height, dtype=np.float64)

    for c in spec.craters:
        r = np.hypot(X - c.cx, Y - c.cy)
        # Smooth bowl: depth at the center, zero at the rim and beyond.
        profile = -c.depth * np.cos(np.pi * r / (2.0 * c.radius)) ** 2
        H += np.where(r <= c.radius, profile, 0.0)

    for h in spec.hills:
        r2 = (X - h.cx) ** 2 + (Y - h.cy) ** 2
        H += h.height * np.exp(-r2 / (2.0 * h.sigma * h.sigma))

    if spec.noise_amplitude > 0.0:
        rng = np.random.default_rng(spec.seed)
        pitch = NOISE_LATTICE_PITCH
        grid_r = rows // pitch + 3
        grid_c = cols // pitch + 3
        lattice = rng.uniform(-1.0, 1.0, size=(grid_r, grid_c))
        fr = (np.arange(rows, dtype=np.float64) + 0.5) / pitch
        fc = (np.arange(cols, dtype=np.float64) + 0.5) / pitch
        ir = np.floor(fr).astype(np.intp)
        ic = np.floor(fc).astype(np.intp)
        tr = (fr - ir)[:, None]
        tc = (fc - ic)[None, :]
        v00 = lattice[np.ix_(ir, ic)]
        v01 = lattice[np.ix_(ir, ic + 1)]
        v10 = lattice[np.ix_(ir + 1, ic)]
        v11 = lattice[np.ix_(ir + 1, ic + 1)]
        top = v00 * (1.0 - tc) + v01 * tc
        bot = v10 * (1.0 - tc) + v11 * tc
        H += spec.noise_amplitude * (top * (1.0 - tr) + bot * tr)

    return HeightField(rows, cols, cs, H.reshape(-1))


# ---------------------------------------------------------------------------
# queries


def cell_height(field, cell):
    """Elevation at a cell center.

    Args:
        cell: (row, col) pair.
    Raises:
        OutOfBounds: cell outside the grid.
    """
    r, c = cell
    if not (0 <= r < field.rows and 0 <= c < field.cols):
        raise OutOfBounds(f"cell {cell} outside {field.rows}x{field.cols} grid")
    return float(field.heights[r * field.cols + c])


def pitch_between(field, a, b):
    """Absolute terrain pitch between adjacent cell centers, in degrees.

    atan(|dh| / d) where d is the horizontal center distance (cell_size
    for cardinal neighbors, cell_size*sqrt(2) for diagonal).  Symmetric in
    its arguments.

    Raises:
        OutOfBounds: either cell outside the grid.
        NotAdjacent: cells are not 8-neighbors.
    """
    ha = cell_height(field, a)
    hb = cell_height(field, b)
    dr = abs(b[0] - a[0])
    dc = abs(b[1] - a[1])
    if dr > 1 or dc > 1 or (dr == 0 and dc == 0):
        raise NotAdjacent(f"cells {a} and {b} are not 8-neighbors")
    d = field.cell_size * (math.sqrt(2.0) if dr == 1 and dc == 1 else 1.0)
    return math.degrees(math.atan(abs(hb - ha) / d))

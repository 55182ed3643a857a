"""Episode evaluation: coverage, path length ratio, energy totals, pitch,
and a generic trajectory-comparison MAE.

The CSV schema frozen here is the one artifact consumers parse; keep the
column order stable.
"""

import math
from dataclasses import dataclass, field

from .errors import EmptyEpisode, EmptyTrajectory, LengthMismatch
from .terrain import pitch_between

CSV_COLUMNS = (
    "seed",
    "alpha",
    "beta",
    "mc_visited",
    "coverage",
    "path_length_ratio",
    "e_forward_total",
    "e_rotate_total",
    "e_total",
    "max_pitch_deg",
    "steps",
    "terminated_by",
)

TERMINATED_COVERAGE = "CoverageReached"
TERMINATED_BUDGET = "BudgetExhausted"
TERMINATED_STUCK = "Stuck"
TERMINATED_START_BLOCKED = "StartBlocked"


@dataclass
class EpisodeResult:
    """Everything one episode produced.

    steps is the full StepRecord log; final_states the world snapshot
    text; trajectory the continuous polyline actually driven (cell
    centers plus detour waypoints); reachable_cells the coverage
    denominator.
    """

    steps: list
    final_states: str
    coverage: float
    path_length: float
    path_length_ratio: float
    e_forward_total: float
    e_rotate_total: float
    e_total: float
    max_pitch: float
    terminated_by: str
    trajectory: list = field(default_factory=list)
    reachable_cells: int = 0
    world: object = None


def path_length_ratio(total_path_length, n_cells, cell_size):
    """Traveled distance in cell units divided by the total cell count.

    1.0 is the single-pass optimum: one cell length of driving per cell.
    """
    if n_cells < 1:
        raise ValueError(f"n_cells must be >= 1, got {n_cells}")
    if cell_size <= 0.0:
        raise ValueError(f"cell_size must be > 0, got {cell_size}")
    return (total_path_length / cell_size) / n_cells


def coverage_percent(world, denominator):
    """Fraction of the reachable free cells visited so far."""
    if denominator < 1:
        raise ValueError(f"denominator must be >= 1, got {denominator}")
    return world.visited_count() / denominator


def max_pitch(steps, field):
    """Maximum terrain pitch over the executed moves, in degrees."""
    if not steps:
        raise EmptyEpisode("max_pitch is undefined for an episode with no steps")
    worst = 0.0
    for rec in steps:
        p = pitch_between(field, rec.from_cell, rec.to_cell)
        if p > worst:
            worst = p
    return worst


def mae(traj_a, traj_b):
    """Mean Euclidean error between index-aligned trajectory samples.

    Points may be 2D or 3D; both trajectories must pair up one-to-one.
    """
    a = list(traj_a)
    b = list(traj_b)
    if len(a) != len(b):
        raise LengthMismatch(f"trajectory lengths differ: {len(a)} vs {len(b)}")
    if not a:
        raise EmptyTrajectory("mae needs at least one point per trajectory")
    total = 0.0
    for pa, pb in zip(a, b):
        if len(pa) != len(pb):
            raise LengthMismatch(f"point dimensions differ: {len(pa)} vs {len(pb)}")
        total += math.sqrt(sum((xa - xb) ** 2 for xa, xb in zip(pa, pb)))
    return total / len(a)


def csv_row(seed, weights, result):
    """One CSV row (list of strings) for an episode result."""
    return [
        str(int(seed)),
        repr(float(weights.alpha)),
        repr(float(weights.beta)),
        repr(float(weights.mc_visited)),
        repr(float(result.coverage)),
        repr(float(result.path_length_ratio)),
        repr(float(result.e_forward_total)),
        repr(float(result.e_rotate_total)),
        repr(float(result.e_total)),
        repr(float(result.max_pitch)),
        str(len(result.steps)),
        result.terminated_by,
    ]


def failed_row(seed, weights, terminated_by):
    """CSV row for an episode that could not run (e.g. blocked start)."""
    return [
        str(int(seed)),
        repr(float(weights.alpha)),
        repr(float(weights.beta)),
        repr(float(weights.mc_visited)),
        repr(0.0),
        repr(0.0),
        repr(0.0),
        repr(0.0),
        repr(0.0),
        repr(0.0),
        "0",
        terminated_by,
    ]


def write_csv(stream, rows):
    """Write header plus rows; decimal points, LF line endings."""
    stream.write(",".join(CSV_COLUMNS) + "\n")
    for row in rows:
        stream.write(",".join(row) + "\n")


def recount_coverage(result):
    """Recount coverage from the snapshot text (oracle helper)."""
    visited = result.final_states.count("+")
    return visited / result.reachable_cells

"""Move scoring and the energy model.

A candidate move from the rover's cell to one of its 8 neighbors is
scored with a hybrid cost

    total = alpha * (static + mc_visited * visit_count) + beta * dem

where static is the step length in cell units plus a turn penalty, the
visited term discourages retracing (the multiplier must stay >= 1.1 or
the greedy planner can loop forever between a pair of cells), and dem is
the absolute elevation change between the two cell centers.  alpha and
beta sum to 1 and blend the terrain-blind and terrain-aware parts.

Energy splits into a driving term that grows with uphill grade and a
spot-turn term linear in the heading change.
"""

import math
from dataclasses import dataclass

from .directions import STEP_UNITS, direction_between, heading_index, turn_increments
from .errors import NotAdjacent
from .terrain import cell_height

WEIGHT_SUM_TOL = 1e-12

# Below this multiplier a once-visited neighbor can outscore fresh cells
# often enough for the greedy planner to oscillate without progress.
MIN_MC_VISITED = 1.1

DEFAULT_TURN_WEIGHT = 0.1


@dataclass(frozen=True)
class CostWeights:
    """Weights of the hybrid move cost."""

    alpha: float = 0.3
    beta: float = 0.7
    mc_visited: float = 1.1
    turn_weight: float = DEFAULT_TURN_WEIGHT
    normalize_dem: bool = False

    def __post_init__(self):
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError(f"alpha and beta must be >= 0, got {self.alpha}, {self.beta}")
        if abs(self.alpha + self.beta - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(
                f"alpha + beta must equal 1 within {WEIGHT_SUM_TOL}, got {self.alpha + self.beta}"
            )
        if self.mc_visited < MIN_MC_VISITED:
            raise ValueError(f"mc_visited must be >= {MIN_MC_VISITED}, got {self.mc_visited}")
        if self.turn_weight < 0.0:
            raise ValueError(f"turn_weight must be >= 0, got {self.turn_weight}")


@dataclass(frozen=True)
class EnergyParams:
    """Energy model constants.

    e_forward: J per meter on flat ground.
    k_grade: dimensionless uphill multiplier on tan(pitch).
    e_rotate: J per degree of heading change.
    """

    e_forward: float = 20.0
    k_grade: float = 5.0
    e_rotate: float = 0.5

    def __post_init__(self):
        if self.e_forward < 0.0 or self.k_grade < 0.0 or self.e_rotate < 0.0:
            raise ValueError("energy parameters must be >= 0")


def static_cost(heading, move_dir, turn_weight=DEFAULT_TURN_WEIGHT):
    """Step length plus turn penalty for moving in move_dir.

    Both arguments are compass directions (index 0..7 or name).  Step
    length is 1 for cardinal and sqrt(2) for diagonal moves, in cell
    units; the penalty is turn_weight per 45-degree increment of the
    shorter rotation from heading to move_dir.
    """
    h = heading_index(heading)
    k = heading_index(move_dir)
    return STEP_UNITS[k] + turn_weight * turn_increments(h, k)


def basic_cost(weights, heading, move_dir, visit_count):
    """Static cost plus the visited-cell penalty mc_visited * visit_count."""
    if visit_count < 0:
        raise ValueError(f"visit_count must be >= 0, got {visit_count}")
    return static_cost(heading, move_dir, weights.turn_weight) + weights.mc_visited * visit_count


def _require_adjacent(frm, to):
    k = direction_between(frm, to)
    if k is None:
        raise NotAdjacent(f"cells {tuple(frm)} and {tuple(to)} are not 8-neighbors")
    return k


def dem_cost(field, frm, to):
    """Absolute elevation change between adjacent cell centers, in meters."""
    _require_adjacent(frm, to)
    return abs(cell_height(field, to) - cell_height(field, frm))


def total_cost(weights, field, heading, frm, to, visit_count):
    """Hybrid move cost: alpha * basic + beta * dem.

    With weights.normalize_dem the elevation term is divided by cell_size
    so both parts are dimensionless.
    """
    k = _require_adjacent(frm, to)
    dem = dem_cost(field, frm, to)
    if weights.normalize_dem:
        dem = dem / field.cell_size
    return weights.alpha * basic_cost(weights, heading, k, visit_count) + weights.beta * dem


def energy_forward(params, field, frm, to, distance=None):
    """Driving energy for one move, in joules.

    e_forward * distance * (1 + k_grade * max(0, tan(pitch_signed))),
    with the signed pitch taken between the two cell centers over the
    straight center distance.  distance defaults to that straight
    distance; a detoured move passes its actual continuous path length.
    Downhill is priced as flat (no recuperation).
    """
    k = _require_adjacent(frm, to)
    d_nom = STEP_UNITS[k] * field.cell_size
    if distance is None:
        distance = d_nom
    dh = cell_height(field, to) - cell_height(field, frm)
    grade = dh / d_nom
    if grade < 0.0:
        grade = 0.0
    return params.e_forward * distance * (1.0 + params.k_grade * grade)


def energy_rotate(params, dtheta_deg):
    """Spot-turn energy for a heading change of dtheta degrees."""
    return params.e_rotate * abs(dtheta_deg)

"""The myopic decision loop: sense, score the 8 neighbors, move to the
cheapest, repeat until the coverage target or the step budget.

The loop itself runs in a stepping kernel (compiled or pure Python, see
``kernel``).  This module owns episode setup, the continuous-detour
handoff to the bug layer, replanning when a detour target turns out to
be unreachable, and assembly of the final EpisodeResult.
"""

from dataclasses import dataclass

import numpy as np

from . import _stepkernel, metrics
from .bug import BugParams, plan_leg
from .costs import CostWeights, EnergyParams
from .directions import DCOL, DROW, STEP_UNITS, heading_index
from .errors import (
    EpisodeStuck,
    GridRoverError,
    NoCandidate,
    StartBlocked,
    Unreachable,
)
from .kernel import SEG_BUDGET, SEG_COVERAGE, SEG_DETOUR, SEG_STUCK, get_kernel
from .world import CellState, decompose, make_rover

DEFAULT_OBSTACLE_FRACTION = 0.05


@dataclass(frozen=True)
class PlannerConfig:
    """Episode parameters.

    step_budget None means 10 * n_cells, resolved at episode start.
    """

    weights: CostWeights = CostWeights()
    energy: EnergyParams = EnergyParams()
    bug: BugParams = BugParams()
    coverage_target: float = 0.95
    step_budget: int | None = None
    start_cell: tuple = (0, 0)
    start_heading: int = 2  # East
    slope_limit: float = 25.0

    def __post_init__(self):
        if not (0.0 < self.coverage_target <= 1.0):
            raise ValueError(f"coverage_target must be in (0, 1], got {self.coverage_target}")
        if self.step_budget is not None and self.step_budget < 1:
            raise ValueError(f"step_budget must be >= 1, got {self.step_budget}")
        if not (0.0 < self.slope_limit < 90.0):
            raise ValueError(f"slope_limit must be in (0, 90), got {self.slope_limit}")
        object.__setattr__(self, "start_heading", heading_index(self.start_heading))
        object.__setattr__(self, "start_cell", tuple(self.start_cell))


@dataclass(frozen=True)
class StepRecord:
    """Audit record of one executed move."""

    step_index: int
    from_cell: tuple
    to_cell: tuple
    chosen_cost: float
    dtheta: float
    distance: float
    energy_forward: float
    energy_rotate: float
    coverage_after: float
    detoured: bool = False


def choose_next(world, rover, weights):
    """Admissible neighbor minimizing the hybrid cost.

    Deterministic tie-break: smaller heading change first, then earlier
    in the clockwise scan from the current heading.  The caller must
    already have applied sense() for the rover's cell.

    Returns ((row, col), cost).  Raises NoCandidate when every neighbor
    is an Obstacle or out of bounds.
    """
    cur = world.cell_index(rover.cell)
    heading = heading_index(rover.heading)
    step_units = np.array(STEP_UNITS, dtype=np.float64)
    choice = _stepkernel.choose_move(
        world.states, world.visit_counts, world.field.heights,
        world.rows, world.cols, world.cell_size, step_units,
        cur, heading, weights.alpha, weights.beta, weights.mc_visited,
        weights.turn_weight, int(weights.normalize_dem),
    )
    if choice is None:
        raise NoCandidate(f"no admissible neighbor from cell {rover.cell}")
    k, cost = choice
    r, c = rover.cell
    return (r + DROW[k], c + DCOL[k]), float(cost)


def replan_on_block(world, rover, blocked_cell):
    """A detour target proved unreachable: reclassify it as an Obstacle.

    The rover stays in place; the caller re-chooses the step.  Free ->
    Obstacle is a legal transition; anything else fails loudly.
    """
    world.mark_obstacle(blocked_cell)
    return world


def _leg_clear_table(world, standoff):
    """Straight-leg clearance for every (cell, direction) pair.

    leg_clear[i, k] == 1 when the segment between the centers of cell i
    and its k-neighbor stays out of every rock disc inflated by standoff.
    Same squared point-segment-distance predicate as ``bug.segment_clear``
    so the kernel and the continuous layer always agree.
    """
    rows, cols, cs = world.rows, world.cols, world.cell_size
    n = rows * cols
    table = np.ones((n, 8), dtype=np.uint8)
    if not world.rocks:
        return table
    cx = (np.tile(np.arange(cols, dtype=np.float64), rows) + 0.5) * cs
    cy = (np.repeat(np.arange(rows, dtype=np.float64), cols) + 0.5) * cs
    rr = np.arange(n) // cols
    cc = np.arange(n) % cols
    for k in range(8):
        nr = rr + DROW[k]
        nc = cc + DCOL[k]
        valid = (nr >= 0) & (nr < rows) & (nc >= 0) & (nc < cols)
        idx = np.nonzero(valid)[0]
        if idx.size == 0:
            continue
        p0x = cx[idx]
        p0y = cy[idx]
        dx = DCOL[k] * cs
        dy = DROW[k] * cs
        vv = dx * dx + dy * dy
        clear = np.ones(idx.size, dtype=bool)
        for rock in world.rocks:
            rinf = rock.r + standoff
            wx = rock.x - p0x
            wy = rock.y - p0y
            t = np.clip((wx * dx + wy * dy) / vv, 0.0, 1.0)
            ex = wx - t * dx
            ey = wy - t * dy
            clear &= (ex * ex + ey * ey) >= rinf * rinf
        table[idx, k] = clear
    return table


def _build_episode_state(world, config, denom, budget, start_idx):
    ep = _stepkernel.EpisodeState()
    ep.states = world.states
    ep.visits = world.visit_counts
    ep.heights = world.field.heights
    ep.rock_blocked = world.rock_blocked
    ep.leg_clear = _leg_clear_table(world, config.bug.standoff)
    cs = world.cell_size
    ep.step_units = np.array(STEP_UNITS, dtype=np.float64)
    ep.step_len_m = np.array([STEP_UNITS[k] * cs for k in range(8)], dtype=np.float64)
    ep.sense_thr = np.array(
        [world.tan_slope_limit * (STEP_UNITS[k] * cs) for k in range(8)],
        dtype=np.float64,
    )
    ep.step_from = np.zeros(budget, dtype=np.int64)
    ep.step_to = np.zeros(budget, dtype=np.int64)
    ep.step_dir = np.zeros(budget, dtype=np.int64)
    ep.step_cost = np.zeros(budget, dtype=np.float64)
    ep.step_dtheta = np.zeros(budget, dtype=np.float64)
    ep.step_dist = np.zeros(budget, dtype=np.float64)
    ep.step_ef = np.zeros(budget, dtype=np.float64)
    ep.step_er = np.zeros(budget, dtype=np.float64)
    ep.step_cov = np.zeros(budget, dtype=np.float64)
    log_cap = 2 * world.n_cells + 8
    ep.log_cell = np.zeros(log_cap, dtype=np.int64)
    ep.log_from = np.zeros(log_cap, dtype=np.int8)
    ep.log_to = np.zeros(log_cap, dtype=np.int8)
    ep.rows = world.rows
    ep.cols = world.cols
    ep.cell_size = cs
    w = config.weights
    ep.alpha = w.alpha
    ep.beta = w.beta
    ep.mc_visited = w.mc_visited
    ep.turn_weight = w.turn_weight
    ep.normalize_dem = int(w.normalize_dem)
    e = config.energy
    ep.e_forward = e.e_forward
    ep.k_grade = e.k_grade
    ep.e_rotate = e.e_rotate
    ep.coverage_target = config.coverage_target
    ep.denom = denom
    ep.budget = budget
    ep.cur = start_idx
    ep.heading = config.start_heading
    ep.step_count = 0
    ep.visited_cells = 0
    ep.log_len = 0
    ep.log_flushed = 0
    ep.pending_dir = -1
    ep.pending_cost = 0.0
    return ep


def _flush_log(world, ep):
    """Append the kernel's pending state transitions to the world log."""
    cols = world.cols
    log = world.transition_log
    for i in range(ep.log_flushed, ep.log_len):
        cell = int(ep.log_cell[i])
        log.append(
            (
                (cell // cols, cell % cols),
                CellState(int(ep.log_from[i])),
                CellState(int(ep.log_to[i])),
            )
        )
    ep.log_flushed = ep.log_len


def run_episode(field, config, obstacle_seed=0,
                obstacle_fraction=DEFAULT_OBSTACLE_FRACTION,
                world=None, backend=None):
    """Run one coverage episode to termination.

    The world is decomposed from (field, obstacle_fraction, obstacle_seed)
    unless a prebuilt one is passed.  Deterministic: identical inputs
    produce bit-identical results on every backend.

    Raises:
        StartBlocked: a rock covers the start cell.
        EpisodeStuck: no admissible move exists before the first step.
    """
    kern = get_kernel(backend)
    if config.bug.standoff >= field.cell_size / 2.0:
        raise ValueError(
            f"standoff {config.bug.standoff} must stay below half the cell size "
            f"({field.cell_size / 2.0}) so cell centers remain standable"
        )
    if world is None:
        world = decompose(field, obstacle_fraction, obstacle_seed,
                          start_cell=config.start_cell, slope_limit=config.slope_limit)
    if world.visited_count():
        raise ValueError("world already carries visits from a previous episode; "
                         "build a fresh one")
    start_idx = world.cell_index(config.start_cell)
    if world.rock_blocked[start_idx]:
        raise StartBlocked(f"start cell {config.start_cell} is covered by an obstacle")
    denom = world.reachable_free_cells(config.start_cell)
    budget = config.step_budget if config.step_budget is not None else 10 * world.n_cells

    rover = make_rover(world, config.start_cell, config.start_heading)
    if world.state_of(config.start_cell) == CellState.UNKNOWN:
        world.mark_free(config.start_cell)
    world.visit(config.start_cell)

    ep = _build_episode_state(world, config, denom, budget, start_idx)
    ep.visited_cells = 1

    detour_paths = {}
    while True:
        reason = kern.run_segment(ep)
        _flush_log(world, ep)
        if reason != SEG_DETOUR:
            break
        k = ep.pending_dir
        cost = ep.pending_cost
        r, c = ep.cur // world.cols, ep.cur % world.cols
        target_cell = (r + DROW[k], c + DCOL[k])
        try:
            path = plan_leg(world.rocks, world.cell_center((r, c)),
                            world.cell_center(target_cell), config.bug)
        except Unreachable:
            if world.state_of(target_cell) == CellState.VISITED:
                # The rover has stood on that center and rocks never move,
                # so a continuous path to it exists; an Unreachable here
                # means the avoidance geometry is inconsistent.
                raise GridRoverError(
                    f"detour to previously visited cell {target_cell} "
                    f"reported unreachable"
                ) from None
            replan_on_block(world, rover, target_cell)
            continue
        _stepkernel.execute_move(ep, k, cost, path.total_length)
        _flush_log(world, ep)
        detour_paths[ep.step_count - 1] = path

    if reason == SEG_STUCK:
        if ep.step_count == 0:
            raise EpisodeStuck(
                f"no admissible move from start cell {config.start_cell}"
            )
        terminated_by = metrics.TERMINATED_STUCK
    elif reason == SEG_COVERAGE:
        terminated_by = metrics.TERMINATED_COVERAGE
    else:
        terminated_by = metrics.TERMINATED_BUDGET

    n_steps = ep.step_count
    cols = world.cols
    steps = []
    for i in range(n_steps):
        frm = int(ep.step_from[i])
        to = int(ep.step_to[i])
        steps.append(
            StepRecord(
                step_index=i,
                from_cell=(frm // cols, frm % cols),
                to_cell=(to // cols, to % cols),
                chosen_cost=float(ep.step_cost[i]),
                dtheta=float(ep.step_dtheta[i]),
                distance=float(ep.step_dist[i]),
                energy_forward=float(ep.step_ef[i]),
                energy_rotate=float(ep.step_er[i]),
                coverage_after=float(ep.step_cov[i]),
                detoured=i in detour_paths and detour_paths[i].detoured,
            )
        )

    trajectory = [world.cell_center(config.start_cell)]
    for i, rec in enumerate(steps):
        if i in detour_paths:
            trajectory.extend(detour_paths[i].waypoints[1:])
        else:
            trajectory.append(world.cell_center(rec.to_cell))

    path_length = 0.0
    e_forward_total = 0.0
    e_rotate_total = 0.0
    for rec in steps:
        path_length += rec.distance
        e_forward_total += rec.energy_forward
        e_rotate_total += rec.energy_rotate

    worst_pitch = 0.0
    if steps:
        worst_pitch = metrics.max_pitch(steps, field)

    rover.cell = world.index_cell(ep.cur)
    rover.heading = ep.heading
    cx, cy = world.cell_center(rover.cell)
    rover.pose = (cx, cy, 45.0 * ep.heading)

    return metrics.EpisodeResult(
        steps=steps,
        final_states=world.snapshot(),
        coverage=ep.visited_cells / denom,
        path_length=path_length,
        path_length_ratio=metrics.path_length_ratio(path_length, world.n_cells, world.cell_size),
        e_forward_total=e_forward_total,
        e_rotate_total=e_rotate_total,
        e_total=e_forward_total + e_rotate_total,
        max_pitch=worst_pitch,
        terminated_by=terminated_by,
        trajectory=trajectory,
        reachable_cells=denom,
        world=world,
    )

"""Pure-Python episode stepping kernel.

This is the reference implementation of the hot loop: sense the 8
neighbors, score them, move to the argmin, repeat.  The compiled twin in
``_speedups.pyx`` mirrors it statement for statement; keep every
arithmetic expression in the same shape and order in both files so the
two backends produce bit-identical episode traces.

The kernel operates on an EpisodeState of flat numpy arrays and returns
control to the planner whenever a chosen move needs a continuous detour
(the precomputed straight-leg clearance table says the leg clips a rock)
or the episode terminates.
"""

from .errors import IllegalVisit

UNKNOWN = 0
FREE = 1
OBSTACLE = 2
VISITED = 3

SEG_COVERAGE = 0
SEG_BUDGET = 1
SEG_STUCK = 2
SEG_DETOUR = 3

_DROW = (-1, -1, 0, 1, 1, 1, 0, -1)
_DCOL = (0, 1, 1, 1, 0, -1, -1, -1)
_TURN_BY_OFFSET = (0, 1, 2, 3, 4, 3, 2, 1)


class EpisodeState:
    """Flat mutable state shared between the planner and the kernels.

    Array fields (set by the planner):
        states      int8[n]      cell states, shared with the GridWorld
        visits      int64[n]     visit counts, shared with the GridWorld
        heights     float64[n]   cell-center elevations (read-only)
        rock_blocked uint8[n]    ground-truth rock footprint mask
        leg_clear   uint8[n, 8]  straight-leg clearance per cell and direction
        step_units  float64[8]   step length in cell units per direction
        step_len_m  float64[8]   step length in meters per direction
        sense_thr   float64[8]   |dh| threshold of the slope test per direction
        step_from/step_to/step_dir        int64[budget]   per-step log
        step_cost/step_dtheta/step_dist/
        step_ef/step_er/step_cov          float64[budget] per-step log
        log_cell    int64[cap]   state-transition log (cell index)
        log_from/log_to int8[cap]

    Scalar fields: rows, cols, cell_size, alpha, beta, mc_visited,
    turn_weight, normalize_dem (0/1), e_forward, k_grade, e_rotate,
    coverage_target, denom, budget, cur, heading, step_count,
    visited_cells, log_len, log_flushed, pending_dir, pending_cost.
    """

    __slots__ = (
        "states", "visits", "heights", "rock_blocked", "leg_clear",
        "step_units", "step_len_m", "sense_thr",
        "step_from", "step_to", "step_dir", "step_cost", "step_dtheta",
        "step_dist", "step_ef", "step_er", "step_cov",
        "log_cell", "log_from", "log_to",
        "rows", "cols", "cell_size",
        "alpha", "beta", "mc_visited", "turn_weight", "normalize_dem",
        "e_forward", "k_grade", "e_rotate",
        "coverage_target", "denom", "budget",
        "cur", "heading", "step_count", "visited_cells",
        "log_len", "log_flushed", "pending_dir", "pending_cost",
    )


def choose_move(states, visits, heights, rows, cols, cell_size, step_units,
                cur, heading, alpha, beta, mc_visited, turn_weight, normalize_dem):
    """Argmin neighbor of the hybrid move cost.

    Scans the 8 directions clockwise starting at the current heading;
    admissible targets are Free or Visited cells.  Ties on cost break
    toward the smaller heading change, then toward the earlier position
    in the clockwise scan.  Returns (direction, cost) or None.
    """
    r = cur // cols
    c = cur % cols
    h0 = heights[cur]
    best_k = -1
    best_cost = 0.0
    best_turn = 0
    for j in range(8):
        k = (heading + j) % 8
        nr = r + _DROW[k]
        nc = c + _DCOL[k]
        if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
            continue
        nb = nr * cols + nc
        s = states[nb]
        if s != FREE and s != VISITED:
            continue
        turn = _TURN_BY_OFFSET[j]
        basic = step_units[k] + turn_weight * turn + mc_visited * visits[nb]
        dem = heights[nb] - h0
        if dem < 0.0:
            dem = -dem
        if normalize_dem:
            dem = dem / cell_size
        cost = alpha * basic + beta * dem
        if best_k < 0 or cost < best_cost or (cost == best_cost and turn < best_turn):
            best_k = k
            best_cost = cost
            best_turn = turn
    if best_k < 0:
        return None
    return best_k, best_cost


def execute_move(ep, k, cost, dist):
    """Commit a chosen move: energies, visit, per-step log, pose update.

    dist is the actual traveled distance in meters (the straight step, or
    the continuous detour length); the uphill grade always uses the
    straight center-to-center geometry.
    """
    cur = ep.cur
    cols = ep.cols
    to = (cur // cols + _DROW[k]) * cols + (cur % cols + _DCOL[k])
    turn = _TURN_BY_OFFSET[(k - ep.heading) % 8]
    dtheta = 45.0 * turn
    er = ep.e_rotate * dtheta
    d_nom = ep.step_len_m[k]
    dh = ep.heights[to] - ep.heights[cur]
    grade = dh / d_nom
    if grade < 0.0:
        grade = 0.0
    ef = ep.e_forward * dist * (1.0 + ep.k_grade * grade)
    s = ep.states[to]
    if s == FREE:
        ep.states[to] = VISITED
        i = ep.log_len
        ep.log_cell[i] = to
        ep.log_from[i] = FREE
        ep.log_to[i] = VISITED
        ep.log_len = i + 1
        ep.visited_cells += 1
    elif s != VISITED:
        raise IllegalVisit(f"move target cell {to} is in state {s}")
    ep.visits[to] += 1
    cov = ep.visited_cells / ep.denom
    i = ep.step_count
    ep.step_from[i] = cur
    ep.step_to[i] = to
    ep.step_dir[i] = k
    ep.step_cost[i] = cost
    ep.step_dtheta[i] = dtheta
    ep.step_dist[i] = dist
    ep.step_ef[i] = ef
    ep.step_er[i] = er
    ep.step_cov[i] = cov
    ep.cur = to
    ep.heading = k
    ep.step_count = i + 1


def run_segment(ep):
    """Advance the episode until it terminates or needs a detour.

    Returns SEG_COVERAGE, SEG_BUDGET, SEG_STUCK, or SEG_DETOUR.  On
    SEG_DETOUR the chosen direction and its cost are left in
    ep.pending_dir / ep.pending_cost and no move has been executed.
    """
    states = ep.states
    visits = ep.visits
    heights = ep.heights
    rock = ep.rock_blocked
    leg_clear = ep.leg_clear
    rows = ep.rows
    cols = ep.cols
    thr = ep.sense_thr
    while True:
        if ep.visited_cells / ep.denom >= ep.coverage_target:
            return SEG_COVERAGE
        if ep.step_count >= ep.budget:
            return SEG_BUDGET
        cur = ep.cur
        r = cur // cols
        c = cur % cols
        h0 = heights[cur]
        for k in range(8):
            nr = r + _DROW[k]
            nc = c + _DCOL[k]
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            nb = nr * cols + nc
            if states[nb] == UNKNOWN:
                dh = heights[nb] - h0
                if dh < 0.0:
                    dh = -dh
                if rock[nb] or dh > thr[k]:
                    new_state = OBSTACLE
                else:
                    new_state = FREE
                states[nb] = new_state
                i = ep.log_len
                ep.log_cell[i] = nb
                ep.log_from[i] = UNKNOWN
                ep.log_to[i] = new_state
                ep.log_len = i + 1
        choice = choose_move(
            states, visits, heights, rows, cols, ep.cell_size, ep.step_units,
            cur, ep.heading, ep.alpha, ep.beta, ep.mc_visited, ep.turn_weight,
            ep.normalize_dem,
        )
        if choice is None:
            return SEG_STUCK
        k, cost = choice
        if not leg_clear[cur, k]:
            ep.pending_dir = k
            ep.pending_cost = cost
            return SEG_DETOUR
        execute_move(ep, k, cost, ep.step_len_m[k])

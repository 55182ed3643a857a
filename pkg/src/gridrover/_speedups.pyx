# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled episode stepping kernel.

Statement-for-statement translation of ``_stepkernel.run_segment``.  The
arithmetic must stay in exactly the same shape and order as the pure
Python version (and the build must disable FP contraction) so both
backends produce bit-identical episode traces.
"""

from libc.math cimport fabs

UNKNOWN = 0
FREE = 1
OBSTACLE = 2
VISITED = 3

SEG_COVERAGE = 0
SEG_BUDGET = 1
SEG_STUCK = 2
SEG_DETOUR = 3


def run_segment(ep):
    """Advance the episode until it terminates or needs a detour.

    Same contract as the pure-Python kernel: returns SEG_* and leaves
    pending_dir/pending_cost set on SEG_DETOUR.
    """
    cdef signed char[::1] states = ep.states
    cdef long long[::1] visits = ep.visits
    cdef const double[::1] heights = ep.heights
    cdef unsigned char[::1] rock = ep.rock_blocked
    cdef unsigned char[:, ::1] leg_clear = ep.leg_clear
    cdef double[::1] step_units = ep.step_units
    cdef double[::1] step_len_m = ep.step_len_m
    cdef double[::1] thr = ep.sense_thr
    cdef long long[::1] step_from = ep.step_from
    cdef long long[::1] step_to = ep.step_to
    cdef long long[::1] step_dir = ep.step_dir
    cdef double[::1] step_cost = ep.step_cost
    cdef double[::1] step_dtheta = ep.step_dtheta
    cdef double[::1] step_dist = ep.step_dist
    cdef double[::1] step_ef = ep.step_ef
    cdef double[::1] step_er = ep.step_er
    cdef double[::1] step_cov = ep.step_cov
    cdef long long[::1] log_cell = ep.log_cell
    cdef signed char[::1] log_from = ep.log_from
    cdef signed char[::1] log_to = ep.log_to

    cdef Py_ssize_t rows = ep.rows
    cdef Py_ssize_t cols = ep.cols
    cdef double cell_size = ep.cell_size
    cdef double alpha = ep.alpha
    cdef double beta = ep.beta
    cdef double mc_visited = ep.mc_visited
    cdef double turn_weight = ep.turn_weight
    cdef bint normalize_dem = ep.normalize_dem
    cdef double e_forward = ep.e_forward
    cdef double k_grade = ep.k_grade
    cdef double e_rotate = ep.e_rotate
    cdef double coverage_target = ep.coverage_target
    cdef long long denom = ep.denom
    cdef long long budget = ep.budget
    cdef Py_ssize_t cur = ep.cur
    cdef int heading = ep.heading
    cdef long long step_count = ep.step_count
    cdef long long visited_cells = ep.visited_cells
    cdef long long log_len = ep.log_len

    cdef int[8] DROW
    cdef int[8] DCOL
    cdef int[8] TURN
    DROW[0] = -1; DROW[1] = -1; DROW[2] = 0; DROW[3] = 1
    DROW[4] = 1; DROW[5] = 1; DROW[6] = 0; DROW[7] = -1
    DCOL[0] = 0; DCOL[1] = 1; DCOL[2] = 1; DCOL[3] = 1
    DCOL[4] = 0; DCOL[5] = -1; DCOL[6] = -1; DCOL[7] = -1
    TURN[0] = 0; TURN[1] = 1; TURN[2] = 2; TURN[3] = 3
    TURN[4] = 4; TURN[5] = 3; TURN[6] = 2; TURN[7] = 1

    cdef int reason = -1
    cdef Py_ssize_t r, c, nr, nc, nb, to, i
    cdef int k, j, turn, best_k, best_turn, new_state
    cdef signed char s
    cdef double h0, dh, dem, basic, cost, best_cost
    cdef double dtheta, er, d_nom, grade, ef, cov, dist

    best_k = -1
    best_cost = 0.0
    best_turn = 0

    while True:
        if (<double>visited_cells) / (<double>denom) >= coverage_target:
            reason = SEG_COVERAGE
            break
        if step_count >= budget:
            reason = SEG_BUDGET
            break
        r = cur // cols
        c = cur % cols
        h0 = heights[cur]
        for k in range(8):
            nr = r + DROW[k]
            nc = c + DCOL[k]
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            nb = nr * cols + nc
            if states[nb] == UNKNOWN:
                dh = heights[nb] - h0
                if dh < 0.0:
                    dh = -dh
                if rock[nb] != 0 or dh > thr[k]:
                    new_state = OBSTACLE
                else:
                    new_state = FREE
                states[nb] = <signed char>new_state
                log_cell[log_len] = nb
                log_from[log_len] = UNKNOWN
                log_to[log_len] = <signed char>new_state
                log_len = log_len + 1

        best_k = -1
        best_cost = 0.0
        best_turn = 0
        for j in range(8):
            k = (heading + j) % 8
            nr = r + DROW[k]
            nc = c + DCOL[k]
            if nr < 0 or nr >= rows or nc < 0 or nc >= cols:
                continue
            nb = nr * cols + nc
            s = states[nb]
            if s != FREE and s != VISITED:
                continue
            turn = TURN[j]
            basic = step_units[k] + turn_weight * turn + mc_visited * <double>visits[nb]
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
            reason = SEG_STUCK
            break
        if leg_clear[cur, best_k] == 0:
            reason = SEG_DETOUR
            break

        # Inline twin of _stepkernel.execute_move for the straight step.
        to = (r + DROW[best_k]) * cols + (c + DCOL[best_k])
        dtheta = 45.0 * best_turn
        er = e_rotate * dtheta
        d_nom = step_len_m[best_k]
        dist = d_nom
        dh = heights[to] - heights[cur]
        grade = dh / d_nom
        if grade < 0.0:
            grade = 0.0
        ef = e_forward * dist * (1.0 + k_grade * grade)
        s = states[to]
        if s == FREE:
            states[to] = VISITED
            log_cell[log_len] = to
            log_from[log_len] = FREE
            log_to[log_len] = VISITED
            log_len = log_len + 1
            visited_cells = visited_cells + 1
        visits[to] = visits[to] + 1
        cov = (<double>visited_cells) / (<double>denom)
        step_from[step_count] = cur
        step_to[step_count] = to
        step_dir[step_count] = best_k
        step_cost[step_count] = best_cost
        step_dtheta[step_count] = dtheta
        step_dist[step_count] = dist
        step_ef[step_count] = ef
        step_er[step_count] = er
        step_cov[step_count] = cov
        cur = to
        heading = best_k
        step_count = step_count + 1

    ep.cur = cur
    ep.heading = heading
    ep.step_count = step_count
    ep.visited_cells = visited_cells
    ep.log_len = log_len
    if reason == SEG_DETOUR:
        ep.pending_dir = best_k
        ep.pending_cost = best_cost
    return reason

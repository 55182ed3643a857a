"""Reactive continuous-space obstacle avoidance for inter-cell legs.

Obstacles are unions of discs (rock footprints).  A leg between two cell
centers is planned with a Bug-2 style policy: drive the straight segment
until it would enter a disc inflated by the standoff, follow the union
boundary at the standoff distance (clockwise when the obstacle center
lies left of the heading at the hit point, counterclockwise otherwise),
and leave at the first point where the boundary crosses the original
start-target line strictly closer to the target than the hit point.

Boundary following is discretized as dense angular stepping (arc steps of
step_resolution), switching discs whenever a step lands inside a
neighboring disc of the union.  The follower gives up and reports the
target unreachable when it closes a loop back to the hit point or walks
more than max_circumnavigation times the summed inflated perimeter.
"""

import math
from dataclasses import dataclass

from .errors import Unreachable

# Interior tolerance used when deciding whether a point is meaningfully
# inside an inflated disc (as opposed to sitting on its boundary).
_EPS = 1e-9


@dataclass(frozen=True)
class BugParams:
    """Avoidance parameters.

    standoff: boundary clearance kept from every disc, meters.
    step_resolution: arc discretization of boundary following, meters.
    max_circumnavigation: walk budget as a multiple of the summed
        inflated disc perimeter.
    """

    standoff: float = 0.3
    step_resolution: float = 0.05
    max_circumnavigation: float = 1.25

    def __post_init__(self):
        if self.standoff <= 0.0 or self.step_resolution <= 0.0 or self.max_circumnavigation <= 0.0:
            raise ValueError("bug parameters must all be positive")
        if self.step_resolution >= self.standoff:
            raise ValueError(
                f"step_resolution {self.step_resolution} must stay below standoff {self.standoff}"
            )


@dataclass
class ContinuousPath:
    """Polyline leg in meters.

    waypoints: ordered (x, y) points from start to target.  Straight
    stretches are single segments; boundary-following arcs are sampled at
    most step_resolution apart.
    total_length: polyline length.
    detoured: True when any boundary following happened.
    """

    waypoints: list
    total_length: float
    detoured: bool


def leg_length(path):
    """Polyline length of a ContinuousPath or a bare waypoint sequence."""
    pts = path.waypoints if hasattr(path, "waypoints") else path
    total = 0.0
    for i in range(1, len(pts)):
        total += math.hypot(pts[i][0] - pts[i - 1][0], pts[i][1] - pts[i - 1][1])
    return total


def _as_discs(rocks, standoff):
    """Normalize rocks to inflated (x, y, r) tuples."""
    out = []
    for rock in rocks:
        x, y, r = float(rock[0]), float(rock[1]), float(rock[2])
        out.append((x, y, r + standoff))
    return out


def _inside(p, disc, margin=0.0):
    """Strictly inside the disc shrunk by margin."""
    dx = p[0] - disc[0]
    dy = p[1] - disc[1]
    rr = disc[2] - margin
    return dx * dx + dy * dy < rr * rr


def segment_clear(p0, p1, discs):
    """True when segment p0-p1 keeps out of every disc.

    Same arithmetic as the planner's precomputed per-move clearance table:
    squared point-segment distance against squared radius, strict.
    """
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    vv = dx * dx + dy * dy
    for cx, cy, r in discs:
        wx = cx - p0[0]
        wy = cy - p0[1]
        if vv > 0.0:
            t = (wx * dx + wy * dy) / vv
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        else:
            t = 0.0
        ex = wx - t * dx
        ey = wy - t * dy
        if ex * ex + ey * ey < r * r:
            return False
    return True


def _first_entry(p0, p1, discs, grazing_tol):
    """First point along segment p0->p1 that enters any disc.

    Returns (t, disc_index) with t in [0, 1], or None when the segment is
    clear.  A start point deep inside a disc reports t = 0 for the most
    deeply penetrated disc; a start point within grazing_tol of a
    boundary it is moving away from (a leave point's discretization dip)
    does not count as inside.
    """
    vx = p1[0] - p0[0]
    vy = p1[1] - p0[1]
    a = vx * vx + vy * vy
    best_t = None
    best_i = -1
    deepest = 0.0
    deepest_i = -1
    for i, (cx, cy, r) in enumerate(discs):
        wx = cx - p0[0]
        wy = cy - p0[1]
        b = wx * vx + wy * vy
        c = wx * wx + wy * wy - r * r
        if c < 0.0:
            # Inside.  Exiting a shallow dip is not a hit; heading inward
            # or sitting deep means boundary following must resume here.
            if b >= 0.0 or c < -(r * grazing_tol):
                if -c > deepest:
                    deepest = -c
                    deepest_i = i
            continue
        if a == 0.0:
            continue
        disc_q = b * b - a * c
        if disc_q <= 0.0:
            continue
        sq = math.sqrt(disc_q)
        t_in = (b - sq) / a
        t_out = (b + sq) / a
        if t_out <= 0.0 or t_in > 1.0:
            continue
        if t_in >= 0.0 and t_out <= 1.0:
            # A pass-through whose penetration stays below the boundary
            # walk's own chord sagitta is a tangent graze, not an
            # obstruction.  Treating it as a hit would start a follow
            # whose m-line crossing chord is shorter than one walk step,
            # leaving the side-change leave test nothing to detect.
            d_min2 = c + r * r - b * b / a
            if d_min2 > 0.0:
                pen = r - math.sqrt(d_min2)
                if pen < grazing_tol * grazing_tol / (8.0 * r):
                    continue
        if t_in < 0.0:
            t_in = 0.0
        if best_t is None or t_in < best_t:
            best_t = t_in
            best_i = i
    if deepest_i >= 0:
        return 0.0, deepest_i
    if best_t is None:
        return None
    return best_t, best_i


def _project_to_boundary(p, disc):
    """Radially project p onto the disc boundary."""
    cx, cy, r = disc
    dx = p[0] - cx
    dy = p[1] - cy
    d = math.hypot(dx, dy)
    if d == 0.0:
        return (cx + r, cy)
    return (cx + dx * r / d, cy + dy * r / d)


def _circle_corner(p, d1, d2):
    """Intersection point of two circles nearest to p, or None."""
    x1, y1, r1 = d1
    x2, y2, r2 = d2
    dx = x2 - x1
    dy = y2 - y1
    dd = dx * dx + dy * dy
    d = math.sqrt(dd)
    if d == 0.0 or d > r1 + r2 or d < abs(r1 - r2):
        return None
    a = (r1 * r1 - r2 * r2 + dd) / (2.0 * d)
    h2 = r1 * r1 - a * a
    h = math.sqrt(h2) if h2 > 0.0 else 0.0
    bx = x1 + a * dx / d
    by = y1 + a * dy / d
    ox = -dy / d * h
    oy = dx / d * h
    c1 = (bx + ox, by + oy)
    c2 = (bx - ox, by - oy)
    e1 = (c1[0] - p[0]) ** 2 + (c1[1] - p[1]) ** 2
    e2 = (c2[0] - p[0]) ** 2 + (c2[1] - p[1]) ** 2
    return c1 if e1 <= e2 else c2


def _push_clear(p, discs):
    """Nudge p out of every disc it strictly penetrates.

    Interpolated waypoints (m-line crossings, union-switch hops) can dip
    a fraction of a walk step inside a neighboring disc even though the
    walk itself stays on the union boundary.  The final polyline keeps
    the standoff only if such points are pushed back out.  Projection
    out of the deepest disc converges toward the union corner; when
    exactly two discs pin the point the corner is solved directly.
    """
    for _ in range(32):
        worst = -1
        worst_pen = _EPS
        inside = []
        for j, (cx, cy, r) in enumerate(discs):
            pen = r - math.hypot(p[0] - cx, p[1] - cy)
            if pen > _EPS:
                inside.append(j)
                if pen > worst_pen:
                    worst_pen = pen
                    worst = j
        if worst < 0:
            return p
        if len(inside) == 2:
            corner = _circle_corner(p, discs[inside[0]], discs[inside[1]])
            if corner is not None:
                p = corner
                continue
        p = _project_to_boundary(p, discs[worst])
    return p


def _follow_boundary(discs, hit, hit_disc, m_start, m_target, hit_dist, params):
    """Walk the union boundary from the hit point until a leave point.

    Returns (arc_waypoints, leave_point).  Raises Unreachable when the
    walk closes a loop back to the hit state or exceeds the perimeter
    budget.
    """
    step = params.step_resolution
    total_perimeter = sum(2.0 * math.pi * d[2] for d in discs)
    budget = params.max_circumnavigation * total_perimeter

    mx = m_target[0] - m_start[0]
    my = m_target[1] - m_start[1]
    m_len2 = mx * mx + my * my

    def signed_side(p):
        return mx * (p[1] - m_start[1]) - my * (p[0] - m_start[0])

    # Direction: clockwise when the obstacle center is left of the heading
    # at the hit point (ties go clockwise).  Heading is along the m-line;
    # with y growing south a non-negative heading x (center - hit) cross
    # product selects the map-clockwise circuit, which in raw atan2 terms
    # means the boundary angle increases.  Either way the walk passes the
    # obstacle on the side the m-line already clips.
    cx, cy, cr = discs[hit_disc]
    cross = mx * (cy - hit[1]) - my * (cx - hit[0])
    angle_sign = 1.0 if cross >= 0.0 else -1.0

    active = hit_disc
    phi = math.atan2(hit[1] - cy, hit[0] - cx)
    hit_phi = phi
    pos = hit
    prev_side = signed_side(pos)
    walked = 0.0
    arc = []

    while walked <= budget:
        cx, cy, cr = discs[active]
        phi += angle_sign * (step / cr)
        cand = (cx + cr * math.cos(phi), cy + cr * math.sin(phi))
        # Union switching: step landed inside a neighboring disc; hop to
        # the most deeply entered one and continue on its boundary.
        deepest = 0.0
        switch_to = -1
        for j, d in enumerate(discs):
            if j == active:
                continue
            ddx = cand[0] - d[0]
            ddy = cand[1] - d[1]
            pen = d[2] - math.hypot(ddx, ddy)
            if pen > _EPS and pen > deepest:
                deepest = pen
                switch_to = j
        if switch_to >= 0:
            active = switch_to
            cand = _project_to_boundary(cand, discs[active])
            phi = math.atan2(cand[1] - discs[active][1], cand[0] - discs[active][0])

        seg = math.hypot(cand[0] - pos[0], cand[1] - pos[1])
        walked += seg
        arc.append(cand)

        # Leave check: did this step cross the m-line at a point strictly
        # closer to the target than the hit point?
        side = signed_side(cand)
        if side == 0.0 or (prev_side < 0.0) != (side < 0.0):
            denom = prev_side - side
            u = 0.0 if denom == 0.0 else prev_side / denom
            leave = (pos[0] + u * (cand[0] - pos[0]), pos[1] + u * (cand[1] - pos[1]))
            tpar = ((leave[0] - m_start[0]) * mx + (leave[1] - m_start[1]) * my) / m_len2
            d_target = math.hypot(m_target[0] - leave[0], m_target[1] - leave[1])
            inside_other = any(
                _inside(leave, d, margin=0.5 * step) for d in discs
            )
            if 0.0 <= tpar <= 1.0 and d_target < hit_dist - _EPS and not inside_other:
                # The crossing only counts as a leave point if the rover can
                # actually advance from it: in a concave pocket the m-line
                # re-enters the boundary at the crossing itself (entry
                # distance ~ 0) and the walk must go on.  Any strictly
                # positive advance is progress: the next hit starts a new
                # follow strictly closer to the target, and the m-line
                # crosses the union boundary at finitely many points, so
                # the number of follow episodes is bounded.
                ahead = _first_entry(leave, m_target, discs, grazing_tol=step)
                if ahead is None or ahead[0] * d_target > _EPS:
                    arc.append(leave)
                    return arc, leave

        # Loop closure: back at the hit point on the hit disc after a full
        # circuit (checked by angle recurrence, not spatial proximity,
        # so narrow necks between union lobes cannot false-positive).
        if walked > 2.0 * step and active == hit_disc:
            dphi = (phi - hit_phi) % (2.0 * math.pi)
            if dphi > math.pi:
                dphi = 2.0 * math.pi - dphi
            if dphi < 1.5 * (step / discs[hit_disc][2]):
                raise Unreachable("boundary follower returned to the hit point")

        pos = cand
        prev_side = side

    raise Unreachable("boundary follower exceeded the circumnavigation budget")


def plan_leg(rocks, start, target, params=None):
    """Plan a continuous leg from start to target around disc obstacles.

    Returns a ContinuousPath whose waypoints run from start to target.
    The path keeps the standoff clearance from every rock (up to the arc
    discretization), starts straight whenever the segment is clear, and
    otherwise alternates straight m-line stretches with boundary arcs.

    Raises:
        Unreachable: target strictly inside an inflated disc, or the
            boundary follower could not find a leave point.
        ValueError: start equals target or start violates the standoff.
    """
    if params is None:
        params = BugParams()
    start = (float(start[0]), float(start[1]))
    target = (float(target[0]), float(target[1]))
    if start == target:
        raise ValueError("leg start and target coincide")
    discs = _as_discs(rocks, params.standoff)
    for d in discs:
        if _inside(start, d, margin=0.5 * params.step_resolution):
            raise ValueError(f"leg start {start} violates the standoff of disc at ({d[0]}, {d[1]})")
        if _inside(target, d):
            raise Unreachable(
                f"target {target} lies within the inflated obstacle at ({d[0]}, {d[1]})"
            )

    if segment_clear(start, target, discs):
        length = math.hypot(target[0] - start[0], target[1] - start[1])
        return ContinuousPath([start, target], length, False)

    waypoints = [start]
    cur = start
    detoured = False
    total = 0.0
    # Hard cap on total path length, beyond any legitimate Bug-2 tour.
    total_perimeter = sum(2.0 * math.pi * d[2] for d in discs)
    straight = math.hypot(target[0] - cur[0], target[1] - cur[1])
    length_cap = straight + params.max_circumnavigation * total_perimeter + 1.0

    def extend(pt):
        # Intermediate points only: the nudge must never move the target.
        nonlocal cur, total
        pt = _push_clear(pt, discs)
        if pt == cur:
            return
        total += math.hypot(pt[0] - cur[0], pt[1] - cur[1])
        waypoints.append(pt)
        cur = pt

    while True:
        hit = _first_entry(cur, target, discs, grazing_tol=params.step_resolution)
        if hit is None:
            if cur != target:
                total += math.hypot(target[0] - cur[0], target[1] - cur[1])
                waypoints.append(target)
            return ContinuousPath(waypoints, total, detoured)

        t_hit, disc_i = hit
        hx = cur[0] + t_hit * (target[0] - cur[0])
        hy = cur[1] + t_hit * (target[1] - cur[1])
        hit_pt = _project_to_boundary((hx, hy), discs[disc_i])
        if t_hit > 0.0 and (hit_pt[0] != cur[0] or hit_pt[1] != cur[1]):
            extend(hit_pt)
        detoured = True
        hit_dist = math.hypot(target[0] - hit_pt[0], target[1] - hit_pt[1])

        arc, leave = _follow_boundary(discs, hit_pt, disc_i, start, target, hit_dist, params)
        for pt in arc:
            extend(pt)
        if cur != leave:
            extend(leave)

        if total > length_cap:
            raise Unreachable("path length exceeded the circumnavigation budget")

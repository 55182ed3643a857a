import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridrover.bug import (
    BugParams,
    ContinuousPath,
    leg_length,
    plan_leg,
    segment_clear,
)
from gridrover.errors import Unreachable

PARAMS = BugParams()  # standoff 0.3, step 0.05


def _min_clearance(path, rocks):
    """Smallest distance from any waypoint to any rock edge."""
    best = math.inf
    for x, y in path.waypoints:
        for rx, ry, rr in rocks:
            best = min(best, math.hypot(x - rx, y - ry) - rr)
    return best


def test_params_validation():
    with pytest.raises(ValueError):
        BugParams(standoff=0.0)
    with pytest.raises(ValueError):
        BugParams(step_resolution=0.0)
    with pytest.raises(ValueError):
        BugParams(standoff=0.05, step_resolution=0.1)
    with pytest.raises(ValueError):
        BugParams(max_circumnavigation=-1.0)


def test_segment_clear_geometry():
    rocks = [(5.0, 5.0, 1.0)]
    assert segment_clear((0.0, 5.0), (3.5, 5.0), rocks)       # stops short
    assert not segment_clear((0.0, 5.0), (10.0, 5.0), rocks)  # through center
    assert segment_clear((0.0, 0.0), (10.0, 0.0), rocks)      # passes wide
    # tangent contact does not count as blocked (strict < inside)
    assert segment_clear((0.0, 4.0), (10.0, 4.0), rocks)
    assert segment_clear((0.0, 0.1), (0.0, 9.9), [])


def test_clear_leg_is_straight():
    path = plan_leg([], (0.0, 0.0), (3.0, 4.0), PARAMS)
    assert isinstance(path, ContinuousPath)
    assert not path.detoured
    assert path.waypoints == [(0.0, 0.0), (3.0, 4.0)]
    assert path.total_length == 5.0
    assert leg_length(path) == 5.0


def test_leg_around_single_disc():
    rocks = [(5.0, 5.0, 0.5)]
    start, target = (3.0, 5.0), (7.0, 5.0)
    path = plan_leg(rocks, start, target, PARAMS)
    assert path.detoured
    assert path.waypoints[0] == start
    assert path.waypoints[-1] == target
    # standoff clearance held to within the arc discretization
    assert _min_clearance(path, rocks) >= PARAMS.standoff - PARAMS.step_resolution - 1e-9
    # never longer than straight distance plus the inflated circumference
    r_inf = 0.5 + PARAMS.standoff
    assert path.total_length < 4.0 + 2.0 * math.pi * r_inf
    assert path.total_length > 4.0
    assert path.total_length == leg_length(path.waypoints)


def test_leg_detour_sides_are_consistent():
    # obstacle center offset from the line: the detour must pass on the
    # clipped side (shorter way around), staying close to the lower bound
    rocks = [(5.0, 5.2, 0.6)]
    path = plan_leg(rocks, (2.0, 5.0), (8.0, 5.0), PARAMS)
    assert path.detoured
    below = sum(1 for x, y in path.waypoints if y < 5.0)
    above = sum(1 for x, y in path.waypoints if y > 5.2)
    assert below > above


def test_leg_waypoint_spacing():
    rocks = [(5.0, 5.0, 0.5)]
    path = plan_leg(rocks, (3.0, 5.0), (7.0, 5.0), PARAMS)
    segs = [math.hypot(x1 - x0, y1 - y0)
            for (x0, y0), (x1, y1) in zip(path.waypoints, path.waypoints[1:])]
    # the two straight stretches (approach and departure) may be long; the
    # boundary arc itself is sampled at the step resolution
    long_segs = [s for s in segs if s > 2.0 * PARAMS.step_resolution]
    assert len(long_segs) <= 2
    assert len(segs) - len(long_segs) >= 3


def test_overlapping_discs_concave_union():
    # two discs overlapping into a concave union on the m-line: the
    # follower must round both instead of leaving into the notch
    rocks = [(5.0, 4.8, 0.5), (5.9, 5.3, 0.5)]
    start, target = (3.0, 5.0), (8.0, 5.0)
    path = plan_leg(rocks, start, target, PARAMS)
    assert path.detoured
    assert path.waypoints[-1] == target
    assert _min_clearance(path, rocks) >= PARAMS.standoff - PARAMS.step_resolution - 1e-9


def test_three_disc_chain():
    rocks = [(4.0, 5.0, 0.4), (5.0, 5.0, 0.4), (6.0, 5.0, 0.4)]
    path = plan_leg(rocks, (2.0, 5.0), (8.0, 5.0), PARAMS)
    assert path.detoured
    assert path.waypoints[-1] == (8.0, 5.0)
    assert _min_clearance(path, rocks) >= PARAMS.standoff - PARAMS.step_resolution - 1e-9


def test_target_inside_inflated_disc_unreachable():
    rocks = [(5.0, 5.0, 0.5)]
    with pytest.raises(Unreachable):
        plan_leg(rocks, (3.0, 5.0), (5.2, 5.0), PARAMS)


def test_enclosed_target_unreachable():
    # ring of overlapping discs around the target
    ring = []
    for i in range(10):
        a = 2.0 * math.pi * i / 10
        ring.append((5.0 + 1.5 * math.cos(a), 5.0 + 1.5 * math.sin(a), 0.55))
    with pytest.raises(Unreachable):
        plan_leg(ring, (1.0, 1.0), (5.0, 5.0), PARAMS)


def test_enclosed_start_side_raises():
    ring = []
    for i in range(10):
        a = 2.0 * math.pi * i / 10
        ring.append((5.0 + 1.5 * math.cos(a), 5.0 + 1.5 * math.sin(a), 0.55))
    # start outside, target outside, but the segment between them cuts the
    # ring: still solvable by going around the whole ring
    path = plan_leg(ring, (2.0, 5.0), (5.0, 8.5), PARAMS)
    assert path.waypoints[-1] == (5.0, 8.5)


def test_start_violating_standoff_rejected():
    rocks = [(5.0, 5.0, 0.5)]
    with pytest.raises(ValueError):
        plan_leg(rocks, (5.6, 5.0), (8.0, 5.0), PARAMS)
    with pytest.raises(ValueError):
        plan_leg(rocks, (3.0, 5.0), (3.0, 5.0), PARAMS)


def test_leg_length_bare_sequence():
    assert leg_length([(0.0, 0.0), (3.0, 4.0), (3.0, 8.0)]) == 9.0
    assert leg_length([(1.0, 1.0)]) == 0.0


@settings(max_examples=40, deadline=None)
@given(
    ox=st.floats(4.0, 6.0),
    oy=st.floats(4.2, 5.8),
    r=st.floats(0.2, 0.6),
)
def test_single_disc_legs_always_resolve(ox, oy, r):
    start, target = (2.0, 5.0), (8.0, 5.0)
    rocks = [(ox, oy, r)]
    # keep endpoints clear of the inflated disc
    for px, py in (start, target):
        if math.hypot(px - ox, py - oy) <= r + PARAMS.standoff + 0.1:
            return
    path = plan_leg(rocks, start, target, PARAMS)
    assert path.waypoints[0] == start
    assert path.waypoints[-1] == target
    assert _min_clearance(path, rocks) >= PARAMS.standoff - PARAMS.step_resolution - 1e-9
    straight = 6.0
    assert path.total_length < straight + 2.0 * math.pi * (r + PARAMS.standoff) + 1e-9

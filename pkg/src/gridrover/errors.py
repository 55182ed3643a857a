"""Exception types raised across the package.

Everything derives from GridRoverError so callers can catch simulator
failures without swallowing ordinary ValueErrors from their own code.
"""


class GridRoverError(Exception):
    """Base class for all simulator errors."""


# ---------------------------------------------------------------------------
# terrain


class MalformedHeader(GridRoverError):
    """Heightfield header line is missing or unparseable."""


class DimensionMismatch(GridRoverError):
    """Raster data does not match the declared rows/cols."""


class NonFiniteValue(GridRoverError):
    """A height value is NaN, infinite, or not a number at all."""


class InvalidSpec(GridRoverError):
    """Terrain spec parameters are out of range."""


class OutOfBounds(GridRoverError):
    """Cell index outside the grid."""


class NotAdjacent(GridRoverError):
    """Two cells are not 8-neighbors."""


# ---------------------------------------------------------------------------
# world


class TooManyObstacles(GridRoverError):
    """Requested obstacle count cannot leave the start cell clear."""


class IllegalVisit(GridRoverError):
    """Attempt to visit a cell that is Unknown or an Obstacle."""


class IllegalTransition(GridRoverError):
    """Cell state change outside the legal transition set."""


class StartBlocked(GridRoverError):
    """Episode start cell is covered by an obstacle."""


# ---------------------------------------------------------------------------
# planner


class NoCandidate(GridRoverError):
    """No admissible neighbor to move to."""


class EpisodeStuck(GridRoverError):
    """Rover has no admissible move before taking any step."""


# ---------------------------------------------------------------------------
# continuous obstacle avoidance


class Unreachable(GridRoverError):
    """Detour target cannot be reached around the obstacle field."""


# ---------------------------------------------------------------------------
# experiment configuration


class ParseError(GridRoverError):
    """Config file syntax error; message names the offending line."""

    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class ValidationError(GridRoverError):
    """Config values violate a constraint; message names the constraint."""


# ---------------------------------------------------------------------------
# metrics


class LengthMismatch(GridRoverError):
    """Trajectories compared point-wise have different lengths."""


class EmptyTrajectory(GridRoverError):
    """Trajectory comparison needs at least one point."""


class EmptyEpisode(GridRoverError):
    """Metric is undefined for an episode with no steps."""

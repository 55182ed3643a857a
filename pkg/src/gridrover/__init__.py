"""Coverage path simulation for a sensing-limited rover on gridded terrain.

The rover sees only its eight neighbor cells.  Each step it scores the
admissible neighbors with a weighted blend of motion cost and height
change, moves to the cheapest, and repeats until a coverage target or a
step budget is hit.  Rocks live in continuous coordinates; when a
straight hop is blocked the rover slides around the rock boundary and
rejoins the grid on the far side.

The stepping core exists twice: a compiled extension and a pure Python
fallback with identical numerics, selected at import (see gridrover.kernel).
"""

from .bug import BugParams, ContinuousPath, leg_length, plan_leg, segment_clear
from .costs import (
    CostWeights,
    EnergyParams,
    basic_cost,
    dem_cost,
    energy_forward,
    energy_rotate,
    static_cost,
    total_cost,
)
from .directions import (
    COMPASS,
    DCOL,
    DROW,
    STEP_UNITS,
    direction_between,
    heading_degrees,
    heading_index,
    heading_name,
    turn_increments,
)
from .experiment import (
    ExperimentConfig,
    parse_config,
    parse_terrain_spec,
    render_map,
    run_suite,
    serialize_config,
)
from .kernel import HAVE_COMPILED, available_backends, get_kernel
from .metrics import (
    CSV_COLUMNS,
    EpisodeResult,
    coverage_percent,
    mae,
    max_pitch,
    path_length_ratio,
    write_csv,
)
from .planner import PlannerConfig, StepRecord, choose_next, replan_on_block, run_episode
from .terrain import (
    Crater,
    HeightField,
    Hill,
    Rock,
    TerrainSpec,
    cell_height,
    dump_heightfield,
    generate_terrain,
    load_heightfield,
    pitch_between,
    write_heightfield,
)
from .world import CellState, GridWorld, RoverState, decompose, make_rover

__version__ = "0.1.0"

__all__ = [
    "BugParams",
    "CSV_COLUMNS",
    "COMPASS",
    "CellState",
    "ContinuousPath",
    "CostWeights",
    "Crater",
    "DCOL",
    "DROW",
    "EnergyParams",
    "EpisodeResult",
    "ExperimentConfig",
    "GridWorld",
    "HAVE_COMPILED",
    "HeightField",
    "Hill",
    "PlannerConfig",
    "Rock",
    "RoverState",
    "STEP_UNITS",
    "StepRecord",
    "TerrainSpec",
    "available_backends",
    "basic_cost",
    "cell_height",
    "choose_next",
    "coverage_percent",
    "decompose",
    "dem_cost",
    "direction_between",
    "dump_heightfield",
    "energy_forward",
    "energy_rotate",
    "generate_terrain",
    "get_kernel",
    "heading_degrees",
    "heading_index",
    "heading_name",
    "leg_length",
    "load_heightfield",
    "mae",
    "make_rover",
    "max_pitch",
    "parse_config",
    "parse_terrain_spec",
    "path_length_ratio",
    "pitch_between",
    "plan_leg",
    "render_map",
    "replan_on_block",
    "run_episode",
    "run_suite",
    "segment_clear",
    "serialize_config",
    "static_cost",
    "total_cost",
    "turn_increments",
    "write_csv",
    "write_heightfield",
]

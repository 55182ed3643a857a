"""Configuration files, suite execution, and map rendering.

Config format: flat ``key = value`` lines with dotted section prefixes
and ``#`` comments.  Repeatable keys: ``terrain.crater``, ``terrain.hill``,
``terrain.rock`` (feature parameters), and ``sweep`` (one ``alpha beta``
pair per line).  Everything else appears at most once.

A suite runs |sweep| x |seeds| episodes over one terrain, writes
``results.csv`` at the output root plus one directory per episode with
the final grid snapshot, the driven trajectory, a rendered P6 map, and a
copy of the terrain so the directory renders standalone.  All outputs
are deterministic: same config, same bytes.
"""

import io
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bug import BugParams
from .costs import CostWeights, EnergyParams, WEIGHT_SUM_TOL
from .directions import heading_name
from .errors import (
    DimensionMismatch,
    EpisodeStuck,
    InvalidSpec,
    ParseError,
    StartBlocked,
    ValidationError,
)
from .metrics import (
    TERMINATED_COVERAGE,
    TERMINATED_START_BLOCKED,
    TERMINATED_STUCK,
    csv_row,
    failed_row,
    write_csv,
)
from .planner import PlannerConfig, run_episode
from .terrain import TerrainSpec, dump_heightfield, generate_terrain, load_heightfield
from .world import decompose

# Cell fill colors, indexed by CellState value, before height shading.
PALETTE = (
    (70, 70, 70),     # Unknown: dark gray
    (205, 205, 205),  # Free: light gray
    (15, 15, 15),     # Obstacle: near black
    (70, 170, 80),    # Visited: green
)
TRAJECTORY_COLOR = (230, 60, 40)
START_COLOR = (50, 90, 230)

# Height shading: brightness factor spans 0.6 (lowest) to 1.0 (highest).
SHADE_BASE = 0.6
SHADE_SPAN = 0.4


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated configuration for a suite."""

    terrain: object  # TerrainSpec or a heightfield file path (str)
    obstacle_fraction: float = 0.05
    planner: PlannerConfig = PlannerConfig()
    sweep: tuple | None = None
    seeds: tuple = ()
    output_dir: str = "runs"


@dataclass
class SuiteSummary:
    """What run_suite produced."""

    rows: list
    csv_path: Path
    episode_dirs: list
    all_covered: bool


# ---------------------------------------------------------------------------
# parsing

_SCALAR_KEYS = {
    "terrain.file", "terrain.rows", "terrain.cols", "terrain.cell_size",
    "terrain.base_height", "terrain.noise_amplitude", "terrain.seed",
    "obstacle_fraction", "seeds", "output_dir",
    "planner.alpha", "planner.beta", "planner.mc_visited", "planner.turn_weight",
    "planner.normalize_dem", "planner.coverage_target", "planner.step_budget",
    "planner.start_row", "planner.start_col", "planner.start_heading",
    "planner.slope_limit",
    "energy.e_forward", "energy.k_grade", "energy.e_rotate",
    "bug.standoff", "bug.step_resolution", "bug.max_circumnavigation",
}
_MULTI_KEYS = {"terrain.crater", "terrain.hill", "terrain.rock", "sweep"}


def _parse_float(value, line_no, key):
    try:
        v = float(value)
    except ValueError:
        raise ParseError(line_no, f"{key} expects a number, got {value!r}") from None
    if not math.isfinite(v):
        raise ParseError(line_no, f"{key} expects a finite number, got {value!r}")
    return v


def _parse_int(value, line_no, key):
    try:
        return int(value)
    except ValueError:
        raise ParseError(line_no, f"{key} expects an integer, got {value!r}") from None


def _parse_bool(value, line_no, key):
    low = value.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ParseError(line_no, f"{key} expects true or false, got {value!r}")


def parse_config(source):
    """Parse and validate an experiment config.

    Accepts a text stream or a string.  Syntax problems raise ParseError
    naming the line; constraint violations raise ValidationError naming
    the constraint.
    """
    text = source.read() if hasattr(source, "read") else source
    scalars = {}
    multi = {key: [] for key in _MULTI_KEYS}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(line_no, f"expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not value:
            raise ParseError(line_no, f"{key} has an empty value")
        if key in _MULTI_KEYS:
            multi[key].append((line_no, value))
        elif key in _SCALAR_KEYS:
            if key in scalars:
                raise ParseError(line_no, f"duplicate key {key}")
            scalars[key] = (line_no, value)
        else:
            raise ParseError(line_no, f"unknown key {key!r}")

    def scalar(key, parse, default=None):
        if key not in scalars:
            return default
        line_no, value = scalars[key]
        return parse(value, line_no, key)

    # terrain: file reference or inline spec, never both
    has_file = "terrain.file" in scalars
    inline_keys = [k for k in scalars if k.startswith("terrain.") and k != "terrain.file"]
    has_inline = bool(inline_keys) or any(multi[k] for k in ("terrain.crater", "terrain.hill", "terrain.rock"))
    if has_file and has_inline:
        raise ValidationError("terrain.file and inline terrain.* keys are mutually exclusive")
    if not has_file and not has_inline:
        raise ValidationError("terrain required: give terrain.file or an inline terrain spec")

    if has_file:
        terrain = scalars["terrain.file"][1]
    else:
        for req in ("terrain.rows", "terrain.cols", "terrain.cell_size"):
            if req not in scalars:
                raise ValidationError(f"inline terrain requires {req}")

        def feature(key, n_fields, label):
            out = []
            for line_no, value in multi[key]:
                parts = value.split()
                if len(parts) != n_fields:
                    raise ParseError(line_no, f"{key} expects {n_fields} numbers ({label})")
                out.append(tuple(_parse_float(p, line_no, key) for p in parts))
            return tuple(out)

        try:
            terrain = TerrainSpec(
                rows=scalar("terrain.rows", _parse_int),
                cols=scalar("terrain.cols", _parse_int),
                cell_size=scalar("terrain.cell_size", _parse_float),
                base_height=scalar("terrain.base_height", _parse_float, 0.0),
                craters=feature("terrain.crater", 4, "cx cy radius depth"),
                hills=feature("terrain.hill", 4, "cx cy sigma height"),
                rocks=feature("terrain.rock", 3, "cx cy radius"),
                noise_amplitude=scalar("terrain.noise_amplitude", _parse_float, 0.0),
                seed=scalar("terrain.seed", _parse_int, 0),
            )
        except (ValueError, InvalidSpec) as exc:
            raise ValidationError(str(exc)) from None

    obstacle_fraction = scalar("obstacle_fraction", _parse_float, 0.05)
    if not (0.0 <= obstacle_fraction < 1.0):
        raise ValidationError(f"obstacle_fraction must be in [0, 1), got {obstacle_fraction}")

    if "seeds" not in scalars:
        raise ValidationError("seeds must be given and non-empty")
    seeds_line, seeds_value = scalars["seeds"]
    seeds = tuple(_parse_int(tok, seeds_line, "seeds") for tok in seeds_value.split())
    if not seeds:
        raise ValidationError("seeds must be non-empty")
    if any(s < 0 for s in seeds):
        raise ValidationError("seeds must be unsigned integers")

    sweep = None
    if multi["sweep"]:
        pairs = []
        for line_no, value in multi["sweep"]:
            parts = value.split()
            if len(parts) != 2:
                raise ParseError(line_no, "sweep expects 'alpha beta'")
            a = _parse_float(parts[0], line_no, "sweep")
            b = _parse_float(parts[1], line_no, "sweep")
            if abs(a + b - 1.0) > WEIGHT_SUM_TOL:
                raise ValidationError(f"alpha + beta must equal 1, got {a} + {b}")
            pairs.append((a, b))
        sweep = tuple(pairs)

    try:
        weights = CostWeights(
            alpha=scalar("planner.alpha", _parse_float, 0.3),
            beta=scalar("planner.beta", _parse_float, 0.7),
            mc_visited=scalar("planner.mc_visited", _parse_float, 1.1),
            turn_weight=scalar("planner.turn_weight", _parse_float, 0.1),
            normalize_dem=scalar("planner.normalize_dem", _parse_bool, False),
        )
        energy = EnergyParams(
            e_forward=scalar("energy.e_forward", _parse_float, 20.0),
            k_grade=scalar("energy.k_grade", _parse_float, 5.0),
            e_rotate=scalar("energy.e_rotate", _parse_float, 0.5),
        )
        bug = BugParams(
            standoff=scalar("bug.standoff", _parse_float, 0.3),
            step_resolution=scalar("bug.step_resolution", _parse_float, 0.05),
            max_circumnavigation=scalar("bug.max_circumnavigation", _parse_float, 1.25),
        )

        def heading(value, line_no, key):
            return value

        planner = PlannerConfig(
            weights=weights,
            energy=energy,
            bug=bug,
            coverage_target=scalar("planner.coverage_target", _parse_float, 0.95),
            step_budget=scalar("planner.step_budget", _parse_int, None),
            start_cell=(
                scalar("planner.start_row", _parse_int, 0),
                scalar("planner.start_col", _parse_int, 0),
            ),
            start_heading=scalar("planner.start_heading", heading, "E"),
            slope_limit=scalar("planner.slope_limit", _parse_float, 25.0),
        )
    except ValueError as exc:
        raise ValidationError(str(exc)) from None

    return ExperimentConfig(
        terrain=terrain,
        obstacle_fraction=obstacle_fraction,
        planner=planner,
        sweep=sweep,
        seeds=seeds,
        output_dir=scalar("output_dir", lambda v, ln, k: v, "runs"),
    )


def parse_terrain_spec(source):
    """Parse a spec file holding only inline terrain.* keys."""
    text = source.read() if hasattr(source, "read") else source
    scalars = {}
    multi = {"terrain.crater": [], "terrain.hill": [], "terrain.rock": []}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(line_no, f"expected 'key = value', got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not value:
            raise ParseError(line_no, f"{key} has an empty value")
        if key in multi:
            multi[key].append((line_no, value))
        elif key in _SCALAR_KEYS and key.startswith("terrain.") and key != "terrain.file":
            if key in scalars:
                raise ParseError(line_no, f"duplicate key {key}")
            scalars[key] = (line_no, value)
        else:
            raise ParseError(line_no, f"unknown key {key!r} (terrain spec takes only terrain.* keys)")

    def scalar(key, parse, default=None):
        if key not in scalars:
            return default
        line_no, value = scalars[key]
        return parse(value, line_no, key)

    for req in ("terrain.rows", "terrain.cols", "terrain.cell_size"):
        if req not in scalars:
            raise ValidationError(f"terrain spec requires {req}")

    def feature(key, n_fields, label):
        out = []
        for line_no, value in multi[key]:
            parts = value.split()
            if len(parts) != n_fields:
                raise ParseError(line_no, f"{key} expects {n_fields} numbers ({label})")
            out.append(tuple(_parse_float(p, line_no, key) for p in parts))
        return tuple(out)

    try:
        return TerrainSpec(
            rows=scalar("terrain.rows", _parse_int),
            cols=scalar("terrain.cols", _parse_int),
            cell_size=scalar("terrain.cell_size", _parse_float),
            base_height=scalar("terrain.base_height", _parse_float, 0.0),
            craters=feature("terrain.crater", 4, "cx cy radius depth"),
            hills=feature("terrain.hill", 4, "cx cy sigma height"),
            rocks=feature("terrain.rock", 3, "cx cy radius"),
            noise_amplitude=scalar("terrain.noise_amplitude", _parse_float, 0.0),
            seed=scalar("terrain.seed", _parse_int, 0),
        )
    except (ValueError, InvalidSpec) as exc:
        raise ValidationError(str(exc)) from None


def serialize_config(config):
    """Config back to text; parse(serialize(c)) == c."""
    out = []
    t = config.terrain
    if isinstance(t, str):
        out.append(f"terrain.file = {t}")
    else:
        out.append(f"terrain.rows = {t.rows}")
        out.append(f"terrain.cols = {t.cols}")
        out.append(f"terrain.cell_size = {t.cell_size!r}")
        out.append(f"terrain.base_height = {t.base_height!r}")
        out.append(f"terrain.noise_amplitude = {t.noise_amplitude!r}")
        out.append(f"terrain.seed = {t.seed}")
        for c in t.craters:
            out.append(f"terrain.crater = {c.cx!r} {c.cy!r} {c.radius!r} {c.depth!r}")
        for h in t.hills:
            out.append(f"terrain.hill = {h.cx!r} {h.cy!r} {h.sigma!r} {h.height!r}")
        for r in t.rocks:
            out.append(f"terrain.rock = {r.cx!r} {r.cy!r} {r.radius!r}")
    out.append(f"obstacle_fraction = {config.obstacle_fraction!r}")
    out.append("seeds = " + " ".join(str(s) for s in config.seeds))
    out.append(f"output_dir = {config.output_dir}")
    if config.sweep is not None:
        for a, b in config.sweep:
            out.append(f"sweep = {a!r} {b!r}")
    p = config.planner
    w = p.weights
    out.append(f"planner.alpha = {w.alpha!r}")
    out.append(f"planner.beta = {w.beta!r}")
    out.append(f"planner.mc_visited = {w.mc_visited!r}")
    out.append(f"planner.turn_weight = {w.turn_weight!r}")
    out.append(f"planner.normalize_dem = {'true' if w.normalize_dem else 'false'}")
    out.append(f"planner.coverage_target = {p.coverage_target!r}")
    if p.step_budget is not None:
        out.append(f"planner.step_budget = {p.step_budget}")
    out.append(f"planner.start_row = {p.start_cell[0]}")
    out.append(f"planner.start_col = {p.start_cell[1]}")
    out.append(f"planner.start_heading = {heading_name(p.start_heading)}")
    out.append(f"planner.slope_limit = {p.slope_limit!r}")
    e = p.energy
    out.append(f"energy.e_forward = {e.e_forward!r}")
    out.append(f"energy.k_grade = {e.k_grade!r}")
    out.append(f"energy.e_rotate = {e.e_rotate!r}")
    b = p.bug
    out.append(f"bug.standoff = {b.standoff!r}")
    out.append(f"bug.step_resolution = {b.step_resolution!r}")
    out.append(f"bug.max_circumnavigation = {b.max_circumnavigation!r}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# suite execution


def _resolve_field(config, base_dir):
    if isinstance(config.terrain, str):
        path = Path(config.terrain)
        if not path.is_absolute() and base_dir is not None:
            path = Path(base_dir) / path
        with open(path, encoding="ascii") as fh:
            return load_heightfield(fh)
    return generate_terrain(config.terrain)


def _episode_dir_name(alpha, beta, seed):
    return f"a{alpha:g}_b{beta:g}_s{seed}"


def run_suite(config, seeds=None, pairs=None, base_dir=None, backend=None):
    """Run the configured sweep and write all artifacts.

    seeds/pairs override the config (CLI --seed, run-vs-sweep mode).
    Episode errors (blocked start, enclosed start) become CSV rows with
    the matching terminated_by value; the suite itself never aborts.
    """
    field = _resolve_field(config, base_dir)
    if config.planner.bug.standoff >= field.cell_size / 2.0:
        raise ValidationError(
            f"bug.standoff {config.planner.bug.standoff} must stay below half "
            f"the cell size ({field.cell_size / 2.0})"
        )
    if seeds is None:
        seeds = config.seeds
    if pairs is None:
        pairs = config.sweep
    if pairs is None:
        pairs = ((config.planner.weights.alpha, config.planner.weights.beta),)

    out_root = Path(config.output_dir)
    if not out_root.is_absolute() and base_dir is not None:
        out_root = Path(base_dir) / out_root
    out_root.mkdir(parents=True, exist_ok=True)

    terrain_text = dump_heightfield(field)
    manual_rocks = () if isinstance(config.terrain, str) else config.terrain.rocks

    rows = []
    episode_dirs = []
    all_covered = True
    for alpha, beta in pairs:
        weights = replace(config.planner.weights, alpha=alpha, beta=beta)
        pconf = replace(config.planner, weights=weights)
        for seed in seeds:
            try:
                world = decompose(
                    field, config.obstacle_fraction, seed,
                    start_cell=pconf.start_cell, slope_limit=pconf.slope_limit,
                )
                for rock in manual_rocks:
                    world.add_rock((rock.cx, rock.cy, rock.radius))
                result = run_episode(field, pconf, seed, config.obstacle_fraction,
                                     world=world, backend=backend)
            except StartBlocked:
                rows.append(failed_row(seed, weights, TERMINATED_START_BLOCKED))
                all_covered = False
                continue
            except EpisodeStuck:
                rows.append(failed_row(seed, weights, TERMINATED_STUCK))
                all_covered = False
                continue

            ep_dir = out_root / _episode_dir_name(alpha, beta, seed)
            ep_dir.mkdir(parents=True, exist_ok=True)
            (ep_dir / "snapshot.txt").write_text(result.final_states, newline="\n")
            traj_text = "".join(f"{x!r} {y!r}\n" for x, y in result.trajectory)
            (ep_dir / "trajectory.txt").write_text(traj_text, newline="\n")
            (ep_dir / "terrain.hfld").write_text(terrain_text, newline="\n")
            image = render_map(
                np.frombuffer(result.final_states.replace("\n", "").encode("ascii"), dtype=np.uint8),
                field,
                trajectory=result.trajectory,
                start_cell=pconf.start_cell,
            )
            (ep_dir / "map.ppm").write_bytes(image)
            episode_dirs.append(ep_dir)

            rows.append(csv_row(seed, weights, result))
            if result.terminated_by != TERMINATED_COVERAGE:
                all_covered = False

    csv_path = out_root / "results.csv"
    buf = io.StringIO()
    write_csv(buf, rows)
    csv_path.write_text(buf.getvalue(), newline="\n")
    return SuiteSummary(rows=rows, csv_path=csv_path, episode_dirs=episode_dirs,
                        all_covered=all_covered)


# ---------------------------------------------------------------------------
# rendering


_SNAPSHOT_ORD = {ord("?"): 0, ord("."): 1, ord("#"): 2, ord("+"): 3}


def render_map(states, field, trajectory=None, start_cell=None, scale=8):
    """Render cell states over terrain shading as a binary P6 pixmap.

    states: int state array of shape (rows, cols) or flat, or a uint8
    array of snapshot characters.  Returns the PPM bytes: one scale x
    scale block per cell, height modulating brightness, the trajectory
    overdrawn as a polyline, and a center marker on the start cell.
    """
    rows, cols = field.rows, field.cols
    arr = np.asarray(states)
    if arr.dtype == np.uint8 and arr.size and arr.max() > 3:
        # snapshot characters
        mapped = np.zeros(arr.size, dtype=np.int8)
        flat = arr.reshape(-1)
        for ch, value in _SNAPSHOT_ORD.items():
            mapped[flat == ch] = value
        arr = mapped
    arr = arr.reshape(-1)
    if arr.size != rows * cols:
        raise DimensionMismatch(
            f"states size {arr.size} does not match {rows}x{cols} field"
        )
    states2d = arr.reshape(rows, cols).astype(np.intp)

    heights = field.grid()
    hmin = float(heights.min())
    hmax = float(heights.max())
    if hmax > hmin:
        t = (heights - hmin) / (hmax - hmin)
    else:
        t = np.full((rows, cols), 0.5)
    factor = SHADE_BASE + SHADE_SPAN * t

    palette = np.array(PALETTE, dtype=np.float64)
    cells = palette[states2d] * factor[:, :, None]
    cells = np.clip(np.rint(cells), 0, 255).astype(np.uint8)
    img = np.repeat(np.repeat(cells, scale, axis=0), scale, axis=1)

    cs = field.cell_size
    height_px = rows * scale
    width_px = cols * scale

    def put(x, y, color):
        px = int(x / cs * scale)
        py = int(y / cs * scale)
        if 0 <= px < width_px and 0 <= py < height_px:
            img[py, px] = color

    if trajectory:
        pts = list(trajectory)
        step = cs / (2.0 * scale)
        for i in range(1, len(pts)):
            x0, y0 = pts[i - 1]
            x1, y1 = pts[i]
            seg = math.hypot(x1 - x0, y1 - y0)
            n = max(1, int(math.ceil(seg / step)))
            for j in range(n + 1):
                u = j / n
                put(x0 + u * (x1 - x0), y0 + u * (y1 - y0), TRAJECTORY_COLOR)

    if start_cell is not None:
        r, c = start_cell
        lo = scale // 4
        hi = max(lo + 1, scale - scale // 4)
        img[r * scale + lo:r * scale + hi, c * scale + lo:c * scale + hi] = START_COLOR

    header = f"P6\n{width_px} {height_px}\n255\n".encode("ascii")
    return header + img.tobytes()

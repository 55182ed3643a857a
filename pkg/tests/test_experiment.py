import numpy as np
import pytest

from gridrover.errors import ParseError, ValidationError
from gridrover.experiment import (
    PALETTE,
    ExperimentConfig,
    parse_config,
    parse_terrain_spec,
    render_map,
    run_suite,
    serialize_config,
)
from gridrover.metrics import CSV_COLUMNS
from gridrover.terrain import TerrainSpec, dump_heightfield, generate_terrain

from conftest import flat_field

MINIMAL = """
terrain.rows = 8
terrain.cols = 8
terrain.cell_size = 1.0
seeds = 1 2
"""


def test_parse_minimal_defaults():
    c = parse_config(MINIMAL)
    assert isinstance(c.terrain, TerrainSpec)
    assert c.terrain.rows == 8
    assert c.obstacle_fraction == 0.05
    assert c.seeds == (1, 2)
    assert c.sweep is None
    assert c.output_dir == "runs"
    p = c.planner
    assert (p.weights.alpha, p.weights.beta) == (0.3, 0.7)
    assert p.weights.mc_visited == 1.1
    assert p.coverage_target == 0.95
    assert p.step_budget is None
    assert p.start_cell == (0, 0)
    assert p.start_heading == 2
    assert p.energy.e_forward == 20.0
    assert p.bug.standoff == 0.3


def test_parse_full_config():
    text = """
# hybrid sweep over one cratered field
terrain.rows = 12
terrain.cols = 10
terrain.cell_size = 0.5
terrain.crater = 3.0 2.0 1.5 0.4
terrain.hill = 1.0 4.0 0.8 0.3
terrain.rock = 2.25 2.25 0.1
terrain.noise_amplitude = 0.02
terrain.seed = 9
obstacle_fraction = 0.1
seeds = 3 5 8
output_dir = out
sweep = 1.0 0.0
sweep = 0.3 0.7
planner.coverage_target = 0.9
planner.start_row = 1
planner.start_col = 1
planner.start_heading = NW
energy.e_rotate = 0.25
bug.standoff = 0.2
"""
    c = parse_config(text)
    assert c.terrain.craters == ((3.0, 2.0, 1.5, 0.4),)
    assert c.terrain.rocks == ((2.25, 2.25, 0.1),)
    assert c.sweep == ((1.0, 0.0), (0.3, 0.7))
    assert c.planner.start_cell == (1, 1)
    assert c.planner.start_heading == 7
    assert c.planner.energy.e_rotate == 0.25
    assert c.output_dir == "out"


@pytest.mark.parametrize("line,err,needle", [
    ("what is this", ParseError, "line 6"),
    ("terrain.rows = 9", ParseError, "duplicate"),
    ("gravity = 3.7", ParseError, "unknown key"),
    ("obstacle_fraction =", ParseError, "empty value"),
    ("obstacle_fraction = lots", ParseError, "number"),
    ("sweep = 0.5", ParseError, "alpha beta"),
    ("sweep = 0.5 0.6", ValidationError, "equal 1"),
    ("obstacle_fraction = 1.0", ValidationError, "obstacle_fraction"),
    ("terrain.file = other.hfld", ValidationError, "mutually exclusive"),
    ("planner.alpha = 0.9", ValidationError, "alpha"),
])
def test_parse_rejects(line, err, needle):
    with pytest.raises(err, match=needle):
        parse_config(MINIMAL + line + "\n")


def test_parse_requires_terrain_and_seeds():
    with pytest.raises(ValidationError, match="terrain"):
        parse_config("seeds = 1\n")
    with pytest.raises(ValidationError, match="seeds"):
        parse_config("terrain.rows = 4\nterrain.cols = 4\nterrain.cell_size = 1\n")
    with pytest.raises(ValidationError, match="seeds"):
        parse_config(MINIMAL.replace("seeds = 1 2", "seeds = -1"))
    with pytest.raises(ValidationError, match="terrain.cell_size"):
        parse_config("terrain.rows = 4\nterrain.cols = 4\nseeds = 1\n")


def test_parse_comments_and_file_terrain():
    c = parse_config("terrain.file = ground.hfld  # relative to the config\nseeds = 4\n")
    assert c.terrain == "ground.hfld"
    assert c.seeds == (4,)


def test_serialize_round_trip():
    text = MINIMAL + "sweep = 0.3 0.7\nsweep = 0.5 0.5\nplanner.step_budget = 99\n"
    c = parse_config(text)
    assert parse_config(serialize_config(c)) == c
    # file-terrain flavor too
    c2 = parse_config("terrain.file = g.hfld\nseeds = 1\n")
    assert parse_config(serialize_config(c2)) == c2


def test_parse_terrain_spec_accepts_only_terrain_keys():
    spec = parse_terrain_spec(
        "terrain.rows = 6\nterrain.cols = 6\nterrain.cell_size = 1.0\n"
        "terrain.crater = 3 3 2 0.5\n")
    assert spec.craters == ((3.0, 3.0, 2.0, 0.5),)
    with pytest.raises(ParseError, match="only terrain"):
        parse_terrain_spec("terrain.rows = 6\nseeds = 1\n")
    with pytest.raises(ValidationError, match="terrain.rows"):
        parse_terrain_spec("terrain.cols = 6\nterrain.cell_size = 1.0\n")


def _suite_config(tmp_path, extra=""):
    text = (MINIMAL + "output_dir = " + str(tmp_path / "runs") + "\n"
            + "sweep = 1.0 0.0\nsweep = 0.3 0.7\n" + extra)
    return parse_config(text)


def test_run_suite_layout_and_csv(tmp_path):
    config = _suite_config(tmp_path)
    summary = run_suite(config)
    assert summary.all_covered
    assert len(summary.rows) == 4  # 2 pairs x 2 seeds
    assert len(summary.episode_dirs) == 4
    names = sorted(d.name for d in summary.episode_dirs)
    assert names == ["a0.3_b0.7_s1", "a0.3_b0.7_s2", "a1_b0_s1", "a1_b0_s2"]
    for d in summary.episode_dirs:
        for fname in ("snapshot.txt", "trajectory.txt", "terrain.hfld", "map.ppm"):
            assert (d / fname).exists(), fname
        snap = (d / "snapshot.txt").read_text()
        assert set(snap) <= set("?.#+\n")
    csv_text = summary.csv_path.read_text()
    lines = csv_text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5


def test_run_suite_rerun_is_byte_identical(tmp_path):
    config = _suite_config(tmp_path)
    first = run_suite(config).csv_path.read_bytes()
    second = run_suite(config).csv_path.read_bytes()
    assert first == second


def test_run_suite_start_blocked_row(tmp_path):
    config = _suite_config(tmp_path, "terrain.rock = 0.5 0.5 0.3\n")
    summary = run_suite(config)
    assert not summary.all_covered
    assert summary.episode_dirs == []
    assert all(row[-1] == "StartBlocked" for row in summary.rows)


def test_run_suite_seed_and_pair_overrides(tmp_path):
    config = _suite_config(tmp_path)
    summary = run_suite(config, seeds=(7,), pairs=((0.5, 0.5),))
    assert len(summary.rows) == 1
    assert summary.episode_dirs[0].name == "a0.5_b0.5_s7"


def test_run_suite_terrain_file(tmp_path):
    field = generate_terrain(TerrainSpec(rows=6, cols=6, cell_size=1.0))
    (tmp_path / "ground.hfld").write_text(dump_heightfield(field), newline="\n")
    config = parse_config(
        "terrain.file = ground.hfld\nseeds = 1\noutput_dir = runs\n")
    summary = run_suite(config, base_dir=tmp_path)
    assert summary.csv_path == tmp_path / "runs" / "results.csv"
    assert summary.all_covered
    copied = (summary.episode_dirs[0] / "terrain.hfld").read_text()
    assert copied == dump_heightfield(field)


def test_render_map_flat_palette():
    f = flat_field(2, 2)
    states = np.array([[0, 1], [2, 3]], dtype=np.int8)
    ppm = render_map(states, f, scale=4)
    assert ppm.startswith(b"P6\n8 8\n255\n")
    pix = np.frombuffer(ppm, dtype=np.uint8, offset=len(b"P6\n8 8\n255\n"))
    pix = pix.reshape(8, 8, 3)
    # flat field shades every cell by 0.6 + 0.4 * 0.5 = 0.8
    for (r, c), state in np.ndenumerate(states):
        expected = tuple(int(round(v * 0.8)) for v in PALETTE[state])
        assert tuple(pix[r * 4 + 1, c * 4 + 1]) == expected


def test_render_map_shading_tracks_height():
    heights = np.array([[0.0, 1.0]])
    from gridrover.terrain import HeightField
    f = HeightField(1, 2, 1.0, heights)
    states = np.array([[1, 1]], dtype=np.int8)
    pix = np.frombuffer(render_map(states, f, scale=2), dtype=np.uint8,
                        offset=len(b"P6\n4 2\n255\n")).reshape(2, 4, 3)
    low = tuple(pix[0, 0])
    high = tuple(pix[0, 3])
    assert low == tuple(int(round(205 * 0.6)) for _ in range(3))
    assert high == (205, 205, 205)


def test_render_map_accepts_snapshot_chars_and_overlays():
    f = flat_field(3, 3)
    chars = "?.#\n+++\n...\n".replace("\n", "")
    states = np.frombuffer(chars.encode("ascii"), dtype=np.uint8)
    ppm = render_map(states, f, trajectory=[(0.5, 1.5), (2.5, 1.5)],
                     start_cell=(1, 0), scale=8)
    pix = np.frombuffer(ppm, dtype=np.uint8,
                        offset=len(b"P6\n24 24\n255\n")).reshape(24, 24, 3)
    # trajectory row crosses the middle band in red
    assert (230, 60, 40) in {tuple(p) for p in pix[12]}
    # start marker block painted blue at the center of cell (1, 0)
    assert tuple(pix[12, 4]) == (50, 90, 230)


def test_render_map_size_mismatch():
    from gridrover.errors import DimensionMismatch
    f = flat_field(3, 3)
    with pytest.raises(DimensionMismatch):
        render_map(np.zeros((2, 2), dtype=np.int8), f)

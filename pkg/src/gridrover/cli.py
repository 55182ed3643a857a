"""Command line front end.

    gridrover run <config>           single weight pair from planner.*
    gridrover sweep <config>         every pair in the sweep table
    gridrover render <episode-dir>   redraw map.ppm from saved outputs
    gridrover gen-terrain <spec> <out.hfld>

Exit status: 0 when every episode reached its coverage target, 1 when
any fell short or failed, 2 on configuration or usage errors.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import GridRoverError, ParseError, ValidationError
from .experiment import parse_config, parse_terrain_spec, render_map, run_suite
from .metrics import TERMINATED_COVERAGE
from .terrain import dump_heightfield, generate_terrain, load_heightfield


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gridrover",
        description="Coverage path simulation for a sensing-limited rover on gridded terrain",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured weight pair over all seeds")
    run.add_argument("config", help="experiment config file")
    run.add_argument("--seed", type=int, nargs="+", default=None,
                     help="override the config's seed list")
    run.add_argument("--backend", default=None, choices=("python", "compiled", "auto"),
                     help="force a stepping backend")

    sweep = sub.add_parser("sweep", help="run every sweep pair over all seeds")
    sweep.add_argument("config", help="experiment config file")
    sweep.add_argument("--seed", type=int, nargs="+", default=None,
                       help="override the config's seed list")
    sweep.add_argument("--backend", default=None, choices=("python", "compiled", "auto"),
                       help="force a stepping backend")

    render = sub.add_parser("render", help="rebuild map.ppm inside an episode directory")
    render.add_argument("episode_dir", help="directory holding snapshot.txt and terrain.hfld")
    render.add_argument("--out", default=None, help="output path (default: <dir>/map.ppm)")
    render.add_argument("--scale", type=int, default=8, help="pixels per cell edge")

    gen = sub.add_parser("gen-terrain", help="generate a heightfield from a terrain spec")
    gen.add_argument("spec", help="terrain spec file (inline terrain.* keys)")
    gen.add_argument("out", help="heightfield output path")
    return parser


def _cmd_suite(args, single_pair):
    with open(args.config, encoding="utf-8") as fh:
        config = parse_config(fh)
    if single_pair:
        pairs = ((config.planner.weights.alpha, config.planner.weights.beta),)
    else:
        if not config.sweep:
            raise ValidationError("sweep requires at least one 'sweep = alpha beta' line")
        pairs = config.sweep
    base_dir = Path(args.config).resolve().parent
    summary = run_suite(config, seeds=args.seed, pairs=pairs,
                        base_dir=base_dir, backend=args.backend)
    for row in summary.rows:
        seed, alpha, beta = row[0], row[1], row[2]
        coverage, steps, terminated = float(row[4]), row[10], row[11]
        print(f"alpha={alpha} beta={beta} seed={seed}: {terminated} "
              f"coverage={coverage:.4f} steps={steps}")
    print(f"wrote {summary.csv_path} ({len(summary.rows)} rows)")
    return 0 if summary.all_covered else 1


def _cmd_render(args):
    ep_dir = Path(args.episode_dir)
    snapshot = (ep_dir / "snapshot.txt").read_text(encoding="ascii")
    with open(ep_dir / "terrain.hfld", encoding="ascii") as fh:
        field = load_heightfield(fh)

    trajectory = None
    start_cell = None
    traj_path = ep_dir / "trajectory.txt"
    if traj_path.exists():
        trajectory = []
        for line in traj_path.read_text(encoding="ascii").splitlines():
            line = line.strip()
            if not line:
                continue
            x, y = line.split()
            trajectory.append((float(x), float(y)))
        if trajectory:
            x0, y0 = trajectory[0]
            start_cell = (int(y0 / field.cell_size), int(x0 / field.cell_size))

    chars = np.frombuffer(
        snapshot.replace("\n", "").encode("ascii"), dtype=np.uint8
    )
    image = render_map(chars, field, trajectory=trajectory,
                       start_cell=start_cell, scale=args.scale)
    out = Path(args.out) if args.out else ep_dir / "map.ppm"
    out.write_bytes(image)
    print(f"wrote {out}")
    return 0


def _cmd_gen_terrain(args):
    with open(args.spec, encoding="utf-8") as fh:
        spec = parse_terrain_spec(fh)
    field = generate_terrain(spec)
    Path(args.out).write_text(dump_heightfield(field), newline="\n")
    print(f"wrote {args.out} ({field.rows}x{field.cols}, cell {field.cell_size:g} m)")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_suite(args, single_pair=True)
        if args.command == "sweep":
            return _cmd_suite(args, single_pair=False)
        if args.command == "render":
            return _cmd_render(args)
        if args.command == "gen-terrain":
            return _cmd_gen_terrain(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc.filename}", file=sys.stderr)
        return 2
    except GridRoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())

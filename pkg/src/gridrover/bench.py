"""Backend benchmark: compiled stepping core against the pure fallback.

Runs the same episodes through both backends, checks the step traces
are identical, and prints wall times.  Usage:

    python -m gridrover.bench [--repeat N]
"""

import argparse
import time

from .costs import CostWeights
from .kernel import HAVE_COMPILED, available_backends
from .planner import PlannerConfig, run_episode
from .terrain import Crater, TerrainSpec, generate_terrain

SCENARIOS = (
    ("flat 80x80", TerrainSpec(rows=80, cols=80, cell_size=1.0), (1, 2, 3)),
    (
        "crater 60x60",
        TerrainSpec(
            rows=60, cols=60, cell_size=1.0,
            craters=(Crater(cx=30.0, cy=30.0, radius=8.0, depth=2.0),),
            noise_amplitude=0.03, seed=7,
        ),
        (1, 2, 3),
    ),
)


def _run_all(field, config, seeds, backend):
    results = []
    t0 = time.perf_counter()
    for seed in seeds:
        results.append(run_episode(field, config, seed, backend=backend))
    return time.perf_counter() - t0, results


def _traces_match(a, b):
    for ra, rb in zip(a, b):
        if ra.steps != rb.steps:
            return False
        if (ra.coverage, ra.e_total, ra.path_length) != (rb.coverage, rb.e_total, rb.path_length):
            return False
    return True


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repeats per backend (best is reported)")
    args = parser.parse_args(argv)

    print(f"backends available: {', '.join(available_backends())}")
    if not HAVE_COMPILED:
        print("compiled core not built; timing the pure backend only")

    config = PlannerConfig(weights=CostWeights(alpha=0.3, beta=0.7))
    for name, spec, seeds in SCENARIOS:
        field = generate_terrain(spec)
        best = {}
        results = {}
        for backend in available_backends():
            timings = []
            for _ in range(max(1, args.repeat)):
                elapsed, res = _run_all(field, config, seeds, backend)
                timings.append(elapsed)
                results[backend] = res
            best[backend] = min(timings)

        steps = sum(len(r.steps) for r in next(iter(results.values())))
        line = f"{name}: {steps} steps over {len(seeds)} episodes"
        for backend in available_backends():
            line += f" | {backend} {best[backend] * 1e3:.1f} ms"
        if HAVE_COMPILED:
            ok = _traces_match(results["python"], results["compiled"])
            speedup = best["python"] / best["compiled"] if best["compiled"] > 0 else float("inf")
            line += f" | speedup x{speedup:.1f} | traces {'identical' if ok else 'DIVERGED'}"
            if not ok:
                print(line)
                raise SystemExit(f"{name}: backend traces diverged")
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

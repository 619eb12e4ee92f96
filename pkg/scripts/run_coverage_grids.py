"""Coverage/width grids for each distribution family, one CSV per distribution."""

import argparse
from pathlib import Path

from turing_ci.distributions import parse_spec
from turing_ci.harness import ExperimentConfig, log_grid, run_experiment

PRESETS = {
    "fixed-uniform": ["uniform:K=100", "uniform:K=500", "uniform:K=1000"],
    "dynamic-uniform": ["dunif:gamma=0.5", "dunif:gamma=1", "dunif:gamma=1.5"],
    "geometric": ["geom:p=0.1", "geom:p=0.5", "geom:p=0.9", "dgeom:c=0.25,beta=0.5"],
    "pareto": ["pareto:alpha=0.5", "pareto:alpha=1.5", "pareto:alpha=2"],
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("preset", choices=sorted(PRESETS))
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--n-min", type=float, default=10)
    ap.add_argument("--n-max", type=float, default=1e5)
    ap.add_argument("--points", type=int, default=8)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    grid = log_grid(args.n_min, args.n_max, args.points)
    for text in PRESETS[args.preset]:
        cfg = ExperimentConfig(parse_spec(text), grid, reps=args.reps, master_seed=args.seed)
        path = args.out / (text.replace(":", "_").replace(",", "_").replace("=", "") + ".csv")
        run_experiment(cfg, path, workers=args.workers)
        print(f"wrote {path}")


if __name__ == "__main__":
    main()

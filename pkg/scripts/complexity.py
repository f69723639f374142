"""Oracle calls needed to reach a tolerance, for both methods.

The strongly convex method tracks E|x - x*|^2 and should need about 1/eps
calls; the accelerated method tracks the gap and should need about
eps^-2 (up to logs).
"""

import argparse

from dynbatch.harness import complexity_curve, run_experiment
from dynbatch.harness.analysis import complexity_slope
from dynbatch.harness.presets import smooth_complexity, strong_complexity
from dynbatch.harness.runner import available_parallelism

SETUPS = {
    "strong": (strong_complexity, "dist_sq", [1e-1, 1e-2, 1e-3, 1e-4]),
    "smooth": (smooth_complexity, "gap", [1e-1, 1e-2, 1e-3]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=available_parallelism())
    args = ap.parse_args()

    for name, (preset, metric, grid) in SETUPS.items():
        res = run_experiment(preset(seed=args.seed), jobs=args.jobs)
        rows = complexity_curve(res, grid, metric=metric)
        print(f"{name} ({metric}):")
        for r in rows:
            print(f"  eps={r.eps:<8g} T_hit={r.T_hit}  calls={r.cum_calls}")
        try:
            print(f"  slope of log calls vs log(1/eps): {complexity_slope(rows):.4g}")
        except ValueError as exc:
            print(f"  slope unavailable: {exc}")


if __name__ == "__main__":
    main()

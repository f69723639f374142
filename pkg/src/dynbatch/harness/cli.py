"""Command line entry point: ``dynbatch {run,sweep,verify,report}``.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 I/O error.  The default output directory is read from ``DYNBATCH_OUT_DIR``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import __version__
from .analysis import complexity_curve, default_window, fit_geometric_rate, fit_power_rate
from .config import ConfigError, ExperimentConfig
from .export import ExportError, default_out_dir, export, read_csv
from .runner import ExperimentError, available_parallelism, run_experiment
from .verify import SUITES, verify

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_IO = 0, 2, 3, 4


def _load(path, args) -> ExperimentConfig:
    try:
        cfg = ExperimentConfig.from_file(path)
    except OSError as exc:
        raise ExportError(f"cannot read config {path}: {exc}") from exc
    over = {"run.seed": args.seed, "run.reps": args.reps, "run.budget": args.budget}
    if cfg.run.name == "experiment":
        over["run.name"] = Path(path).stem
    return cfg.with_overrides(**over)


def _out_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    if args.out:
        return Path(args.out)
    if cfg is not None and cfg.run.out:
        return Path(cfg.run.out)
    return default_out_dir()


def _run_one(path, args) -> None:
    cfg = _load(path, args)
    res = run_experiment(cfg, jobs=args.jobs)
    paths = export(res, ("csv", "json"), _out_dir(args, cfg))
    fits = {k: v for k, v in res.fits.items() if k != "window"}
    print(f"{cfg.run.name}: reps={res.rep_count} failures={res.failures} T={len(res.t)} "
          f"fits={fits}")
    for p in paths:
        print(f"  wrote {p}")


def cmd_run(args) -> int:
    _run_one(args.config, args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    d = Path(args.config_dir)
    if not d.is_dir():
        raise ExportError(f"not a directory: {d}")
    configs = sorted(d.glob("*.cfg"))
    if not configs:
        raise ExportError(f"no *.cfg files under {d}")
    for path in configs:
        _run_one(path, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = verify(args.suite, seed=args.seed or 0)
    for line in rep.lines():
        print(line)
    print(f"suite {rep.suite}: {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_VERIFY


class _Stored:
    """Minimal result view rebuilt from an exported CSV."""

    def __init__(self, cols):
        self.t = cols["t"]
        self.cum_calls = cols["cum_calls"]
        self.gap_mean = cols["gap_mean"]
        self.dist_sq_mean = cols["dist_sq_mean"]


def cmd_report(args) -> int:
    d = Path(args.result_dir)
    csvs = sorted(d.glob("*.csv"))
    if not csvs:
        raise ExportError(f"no exported CSV files under {d}")
    eps = [float(e) for e in args.eps.split(",")]
    for path in csvs:
        cols = read_csv(path)
        view = _Stored(cols)
        algo = str(cols["algo"][0]) if len(cols["algo"]) else "?"
        out = {"file": path.name, "algo": algo, "T": int(len(view.t))}
        try:
            w = default_window(len(view.t))
            if algo == "accelerated":
                out["gap_power_slope"], out["r2"] = fit_power_rate(view.t, view.gap_mean, w)
            else:
                out["dist_sq_geometric_ratio"], out["r2"] = fit_geometric_rate(
                    view.t, view.dist_sq_mean, w)
        except ValueError as exc:
            out["fit_error"] = str(exc)
        out["complexity"] = [
            {"eps": r.eps, "T_hit": r.T_hit, "cum_calls": r.cum_calls}
            for r in complexity_curve(view, eps)
        ]
        print(json.dumps(out, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dynbatch", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"dynbatch {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $DYNBATCH_OUT_DIR or ./results)")
    common.add_argument("--seed", type=int, help="override run.seed")
    common.add_argument("--reps", type=int, help="override run.reps")
    common.add_argument("--budget", type=int, help="override run.budget (oracle calls per run)")
    common.add_argument("--jobs", type=int, default=available_parallelism(),
                        help="worker processes for replications")
    sub = ap.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", parents=[common], help="run one experiment config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    p = sub.add_parser("sweep", parents=[common], help="run every *.cfg in a directory")
    p.add_argument("config_dir")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", help=f"one of: {', '.join(SUITES)}")
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("report", parents=[common], help="fits and complexity tables from CSVs")
    p.add_argument("result_dir")
    p.add_argument("--eps", default="1e-1,1e-2,1e-3,1e-4", help="comma separated tolerances")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ExperimentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExportError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # unknown suite names and similar argument errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

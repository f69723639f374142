"""CSV / JSON serialization of experiment results."""

from __future__ import annotations

import csv
import json
import math
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from .. import __version__

CSV_COLUMNS = ("algo", "rep_count", "t", "N_t", "cum_calls", "gap_mean", "gap_se",
               "dist_sq_mean", "dist_sq_se", "dM_mean", "dM_se", "alpha_t", "beta_t")

FORMATS = ("csv", "json")

OUT_DIR_ENV = "DYNBATCH_OUT_DIR"


class ExportError(OSError):
    pass


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "results"))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def csv_rows(result) -> list[list[str]]:
    rows = []
    for i in range(len(result.t)):
        rec = {
            "algo": result.algo, "rep_count": result.rep_count, "t": result.t[i],
            "N_t": result.N_t[i], "cum_calls": result.cum_calls[i],
            "gap_mean": result.gap_mean[i], "gap_se": result.gap_se[i],
            "dist_sq_mean": result.dist_sq_mean[i], "dist_sq_se": result.dist_sq_se[i],
            "dM_mean": result.dM_mean[i], "dM_se": result.dM_se[i],
            "alpha_t": result.alpha_t[i], "beta_t": result.beta_t[i],
        }
        rows.append([_fmt(rec[c]) for c in CSV_COLUMNS])
    return rows


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # JSON has no inf/nan literals; keep them readable as strings
        return v if math.isfinite(v) else repr(v)
    return v


def summary(result) -> dict:
    return _jsonable({
        "algo": result.algo,
        "version": __version__,
        "seed": result.seed,
        "rep_count": result.rep_count,
        "failures": result.failures,
        "statuses": result.statuses,
        "fits": result.fits,
        "bound_report": None if result.bound is None else result.bound.as_dict(),
        "constants": result.constants,
        "init_gap": result.init_gap,
        "init_dist_sq": result.init_dist_sq,
        "config_echo": result.config.to_flat(),
    })


def export(result, formats: Iterable[str] = FORMATS, out_dir=None) -> list[Path]:
    formats = list(formats)
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise ValueError(f"unknown export formats {bad}; valid: {FORMATS}")
    if result is None or result.rep_count == 0 or len(result.t) == 0:
        raise ValueError("nothing to export: the result holds no completed replication")
    out = Path(out_dir) if out_dir is not None else default_out_dir()
    name = result.config.run.name
    paths = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        if "csv" in formats:
            p = out / f"{name}.csv"
            with p.open("w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(CSV_COLUMNS)
                w.writerows(csv_rows(result))
            paths.append(p)
        if "json" in formats:
            p = out / f"{name}.json"
            p.write_text(json.dumps(summary(result), indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
            paths.append(p)
    except OSError as exc:
        raise ExportError(f"cannot write results under {out}: {exc}") from exc
    return paths


def read_csv(path) -> dict[str, np.ndarray]:
    """Columns of an exported CSV; numeric columns come back as arrays."""
    try:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ExportError(f"cannot read {path}: {exc}") from exc
    cols: dict[str, np.ndarray] = {}
    for c in CSV_COLUMNS:
        vals = [r[c] for r in rows]
        if c == "algo":
            cols[c] = np.array(vals)
        elif c in ("rep_count", "t", "N_t", "cum_calls"):
            cols[c] = np.array([int(v) for v in vals], dtype=np.int64)
        else:
            cols[c] = np.array([float(v) for v in vals])
    return cols

"""Rate fits and oracle-complexity tables."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


def default_window(n: int) -> tuple[int, int]:
    """Drop the first 10% of iterations."""
    return (n // 10 + 1, n)


def _window(t_values, means, window):
    t = np.asarray(t_values, dtype=float)
    m = np.asarray(means, dtype=float)
    if t.shape != m.shape:
        raise ValueError("t_values and means must have the same length")
    lo, hi = window if window is not None else default_window(int(t.max()) if t.size else 0)
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 5:
        raise ValueError(f"window [{lo}, {hi}] holds {int(sel.sum())} points; need at least 5")
    if np.any(~(m[sel] > 0)) or np.any(~np.isfinite(m[sel])):
        raise ValueError("means in the fit window must be positive and finite")
    return t[sel], m[sel]


def _linfit(x, y) -> tuple[float, float]:
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    sxy = float(((x - xm) * (y - ym)).sum())
    syy = float(((y - ym) ** 2).sum())
    slope = sxy / sxx
    r2 = 1.0 if syy == 0 else sxy * sxy / (sxx * syy)
    return slope, r2


def fit_power_rate(t_values, means, window=None) -> tuple[float, float]:
    """Least-squares slope of log(mean) against log(t), and r^2."""
    t, m = _window(t_values, means, window)
    return _linfit(np.log(t), np.log(m))


def fit_geometric_rate(t_values, means, window=None) -> tuple[float, float]:
    """exp of the least-squares slope of log(mean) against t, and r^2."""
    t, m = _window(t_values, means, window)
    slope, r2 = _linfit(t, np.log(m))
    return math.exp(slope), r2


@dataclass(frozen=True)
class ComplexityRow:
    eps: float
    T_hit: Optional[int]
    cum_calls: Optional[int]

    @property
    def reached(self) -> bool:
        return self.T_hit is not None


def complexity_curve(result, eps_grid: Sequence[float], metric: str = "gap") -> list[ComplexityRow]:
    """First iteration whose mean ``metric`` (gap or dist_sq) is at most eps."""
    means = np.asarray(getattr(result, f"{metric}_mean"), dtype=float)
    t = np.asarray(result.t)
    calls = np.asarray(result.cum_calls)
    rows = []
    for eps in eps_grid:
        hit = np.flatnonzero(means <= eps)
        if hit.size:
            k = int(hit[0])
            rows.append(ComplexityRow(float(eps), int(t[k]), int(calls[k])))
        else:
            rows.append(ComplexityRow(float(eps), None, None))
    return rows


def complexity_slope(rows: Sequence[ComplexityRow]) -> float:
    """Log-log slope of cumulative calls against 1/eps over the reached rows."""
    pts = [(1.0 / r.eps, r.cum_calls) for r in rows if r.reached]
    if len(pts) < 2:
        raise ValueError("need at least two reached tolerances")
    x = np.log([p[0] for p in pts])
    y = np.log([float(p[1]) for p in pts])
    return _linfit(x, y)[0]

"""Stochastic accelerated prox-gradient and stochastic prox-gradient with growing batches.

Both solvers draw the mini-batch of iteration ``t`` from the sub-stream
``stream.child(t)``, where ``stream`` identifies the replication.  Recording
options therefore never change the sampled trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .numeric import RngStream
from .oracle import OracleCounter, OracleModel, minibatch_gradient
from .problems import ProblemInstance, gap, require_strongly_convex
from .prox import prox_step
from .schedules import SmoothPolicy, StrongPolicy

STATUSES = ("completed", "budget_exhausted", "numerical_failure")

ITERATE_STORAGE_MAX_DIM = 50

_FIELDS = ("N_t", "cum_calls", "gap", "dist_sq", "s_dist_sq", "delta_A", "delta_M",
           "alpha_t", "beta_t")


@dataclass(frozen=True)
class RecordOptions:
    """``store_iterates=None`` stores iterates only when ``d <= 50``."""

    store_iterates: Optional[bool] = None

    def stores(self, d: int) -> bool:
        if self.store_iterates is None:
            return d <= ITERATE_STORAGE_MAX_DIM
        return bool(self.store_iterates)


@dataclass
class Trajectory:
    """Per-iteration records of one run.

    Record ``t`` (1-based) holds the iterate produced by step ``t``: ``z^t``
    for the accelerated method and ``x^{t+1}`` for the prox-gradient method.
    ``init_gap`` / ``init_dist_sq`` describe the starting point.
    """

    algo: str
    t: np.ndarray
    N_t: np.ndarray
    cum_calls: np.ndarray
    gap: np.ndarray
    dist_sq: np.ndarray
    s_dist_sq: np.ndarray
    delta_A: np.ndarray
    delta_M: np.ndarray
    alpha_t: np.ndarray
    beta_t: np.ndarray
    status: str
    init_gap: float
    init_dist_sq: float
    iterates: Optional[np.ndarray] = None
    x0: Optional[np.ndarray] = field(default=None, repr=False)

    def __len__(self) -> int:
        return int(self.t.shape[0])

    @property
    def total_calls(self) -> int:
        return int(self.cum_calls[-1]) if len(self) else 0


class _Recorder:
    def __init__(self, T: int, d: int, store: bool):
        self.cols = {k: [] for k in _FIELDS}
        self.iterates = [] if store else None

    def add(self, x, **vals):
        for k, v in vals.items():
            self.cols[k].append(v)
        if self.iterates is not None:
            self.iterates.append(x.copy())

    def finish(self, algo, status, init_gap, init_dist_sq, x0) -> Trajectory:
        n = len(self.cols["N_t"])
        arr = {k: np.asarray(v, dtype=np.int64 if k in ("N_t", "cum_calls") else float)
               for k, v in self.cols.items()}
        for k in arr:
            if arr[k].shape != (n,):
                arr[k] = arr[k].reshape(n)
        its = None
        if self.iterates is not None:
            its = np.array(self.iterates).reshape(n, x0.shape[0])
        return Trajectory(algo=algo, t=np.arange(1, n + 1), status=status, init_gap=init_gap,
                          init_dist_sq=init_dist_sq, iterates=its, x0=x0, **arr)


def extrapolate(z_t, z_prev, beta_t: float, beta_next: float) -> np.ndarray:
    """y^{t+1} = ((beta_t - 1) / beta_{t+1}) (z^t - z^{t-1}) + z^t."""
    z_t = np.asarray(z_t, dtype=float)
    return ((beta_t - 1.0) / beta_next) * (z_t - np.asarray(z_prev, dtype=float)) + z_t


def s_point(z_t, z_prev, beta_t: float) -> np.ndarray:
    """s^t = beta_t z^t - (beta_t - 1) z^{t-1}."""
    return beta_t * np.asarray(z_t, dtype=float) - (beta_t - 1.0) * np.asarray(z_prev, dtype=float)


def ledger_terms(eps, s_prev, x_star, alpha_next: float, beta_next: float,
                 L: float) -> tuple[float, float]:
    """(Delta A, Delta M) for one step with gradient error ``eps``."""
    if not 1.0 - L * alpha_next > 0:
        raise ValueError(f"need 1 - L alpha > 0, got L={L}, alpha={alpha_next}")
    eps = np.asarray(eps, dtype=float)
    dA = alpha_next**2 * beta_next**2 / (1.0 - L * alpha_next) * float(eps @ eps)
    dM = 2.0 * alpha_next * beta_next * float(eps @ (np.asarray(x_star) - np.asarray(s_prev)))
    return dA, dM


def _start(problem: ProblemInstance, x0) -> np.ndarray:
    if x0 is None:
        x0 = np.zeros(problem.dim)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.dim,):
        raise ValueError(f"start point has shape {x0.shape}, problem dimension is {problem.dim}")
    return problem.cons.project(x0)


def _sq(v: np.ndarray) -> float:
    return float(v @ v)


def run_accelerated(problem: ProblemInstance, model: OracleModel | None, policy: SmoothPolicy,
                    T: int, oracle_budget: int | None, stream: RngStream,
                    record_options: RecordOptions | None = None, x0=None) -> Trajectory:
    """Accelerated stochastic prox-gradient with batch sizes ``policy.batch(t)``; starts at y^1 = z^0."""
    model = problem.oracle if model is None else model
    if T < 1:
        raise ValueError("T must be >= 1")
    alpha = policy.alpha(1)
    if not alpha * problem.L < 1:
        raise ValueError(f"stepsize {alpha:.6g} is not below 1/L = {1 / problem.L:.6g}")
    record_options = record_options or RecordOptions()
    z0 = _start(problem, x0)
    rec = _Recorder(T, problem.dim, record_options.stores(problem.dim))
    x_star = problem.x_star
    counter = OracleCounter()
    z_prev, y, s_prev = z0, z0, z0
    status = "completed"
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, T + 1):
            N = policy.batch(t)
            if oracle_budget is not None and counter.calls + N > oracle_budget:
                status = "budget_exhausted"
                break
            batch = minibatch_gradient(model, problem, y, N, stream.child(t), counter)
            z = prox_step(problem.reg, problem.cons, y, batch.grad, alpha)
            if not np.all(np.isfinite(z)):
                status = "numerical_failure"
                break
            beta_t, beta_next = policy.beta(t), policy.beta(t + 1)
            eps = batch.grad - problem.true_gradient(y)
            dA, dM = ledger_terms(eps, s_prev, x_star, alpha, beta_t, problem.L)
            s_t = s_point(z, z_prev, beta_t)
            v = gap(problem, z)
            if not math.isfinite(v):
                status = "numerical_failure"
                break
            rec.add(z, N_t=N, cum_calls=counter.calls, gap=v, dist_sq=_sq(z - x_star),
                    s_dist_sq=_sq(s_t - x_star), delta_A=dA, delta_M=dM, alpha_t=alpha, beta_t=beta_t)
            y = extrapolate(z, z_prev, beta_t, beta_next)
            z_prev, s_prev = z, s_t
    return rec.finish("accelerated", status, gap(problem, z0), _sq(z0 - x_star), z0)


def run_prox_gradient(problem: ProblemInstance, model: OracleModel | None, policy: StrongPolicy,
                      T: int, oracle_budget: int | None, stream: RngStream,
                      record_options: RecordOptions | None = None, x0=None) -> Trajectory:
    """Stochastic prox-gradient x^{t+1} = prox(x^t, batch gradient, mu / L).

    The ledger columns use weight 1 and the current point (``s^t = x^t``);
    ``s_dist_sq`` then repeats ``dist_sq``.
    """
    require_strongly_convex(problem)
    model = problem.oracle if model is None else model
    if T < 1:
        raise ValueError("T must be >= 1")
    alpha = policy.alpha()
    if not alpha * problem.L < 1:
        raise ValueError(f"stepsize {alpha:.6g} is not below 1/L = {1 / problem.L:.6g}")
    record_options = record_options or RecordOptions()
    x1 = _start(problem, x0)
    rec = _Recorder(T, problem.dim, record_options.stores(problem.dim))
    x_star = problem.x_star
    counter = OracleCounter()
    x = x1
    status = "completed"
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, T + 1):
            N = policy.batch(t)
            if oracle_budget is not None and counter.calls + N > oracle_budget:
                status = "budget_exhausted"
                break
            batch = minibatch_gradient(model, problem, x, N, stream.child(t), counter)
            x_next = prox_step(problem.reg, problem.cons, x, batch.grad, alpha)
            if not np.all(np.isfinite(x_next)):
                status = "numerical_failure"
                break
            eps = batch.grad - problem.true_gradient(x)
            dA, dM = ledger_terms(eps, x, x_star, alpha, 1.0, problem.L)
            v = gap(problem, x_next)
            if not math.isfinite(v):
                status = "numerical_failure"
                break
            d2 = _sq(x_next - x_star)
            rec.add(x_next, N_t=N, cum_calls=counter.calls, gap=v, dist_sq=d2, s_dist_sq=d2,
                    delta_A=dA, delta_M=dM, alpha_t=alpha, beta_t=1.0)
            x = x_next
    return rec.finish("prox_gradient", status, gap(problem, x1), _sq(x1 - x_star), x1)

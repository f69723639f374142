"""Stochastic first-order oracles with additive or multiplicative noise.

Two noise laws are supported:

additive
    ``grad F(x, xi) = grad f(x) + eps`` with ``eps ~ N(0, sigma^2/d I)`` so that
    ``E||eps||^2 = sigma^2`` at every point.
random_matrix
    ``A(xi) = A_bar + s G`` and ``b(xi) = b_bar + s_b h`` with standard normal
    ``G`` (d x d) and ``h`` (d), and ``grad F(x, xi) = A(xi) x + b(xi)``.
    Then ``sigma(x)^2 = s^2 d ||x||^2 + s_b^2 d``; the matrix part is
    ``<x, B x>`` with ``B = s^2 d I``.

Because both laws are Gaussian, the average of ``N`` samples has a closed
form distribution (the fluctuation shrinks by ``1/sqrt(N)``).  The default
``sampling="aggregate"`` draws that average directly, which is exact in law
and costs O(d^2) regardless of ``N``; ``sampling="explicit"`` draws and
averages the ``N`` samples one by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .numeric import StreamLike, as_generator

ORACLE_KINDS = ("additive", "random_matrix")
SAMPLING_MODES = ("aggregate", "explicit")

_CHUNK = 4096


@dataclass(frozen=True)
class OracleModel:
    kind: str = "additive"
    sigma: float = 0.0
    scale: float = 0.0
    vector_scale: float | None = None
    sampling: str = "aggregate"

    def __post_init__(self):
        if self.kind not in ORACLE_KINDS:
            raise ValueError(f"unknown oracle kind {self.kind!r}; expected one of {ORACLE_KINDS}")
        if self.sampling not in SAMPLING_MODES:
            raise ValueError(f"unknown sampling mode {self.sampling!r}")
        if self.sigma < 0 or self.scale < 0 or (self.vector_scale or 0.0) < 0:
            raise ValueError("noise scales must be nonnegative")

    @property
    def b_scale(self) -> float:
        return self.scale if self.vector_scale is None else self.vector_scale

    @property
    def noiseless(self) -> bool:
        if self.kind == "additive":
            return self.sigma == 0
        return self.scale == 0 and self.b_scale == 0

    def pointwise_sigma(self, x: np.ndarray) -> float:
        """Closed-form sigma(x) = L2 norm of ||grad F(x, xi) - grad f(x)||."""
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        if self.kind == "additive":
            return float(self.sigma)
        return float(math.sqrt(d * (self.scale**2 * float(x @ x) + self.b_scale**2)))

    def sigma_L(self, d: int) -> float:
        """Tight multiplicative spread: sigma(x) <= sigma(y) + sigma_L ||x - y||."""
        if self.kind == "additive":
            return 0.0
        return self.scale * math.sqrt(d)

    def B_matrix(self, d: int) -> np.ndarray:
        """Sum of the row covariances of A(xi)."""
        if self.kind == "additive":
            return np.zeros((d, d))
        return self.scale**2 * d * np.eye(d)


@dataclass
class OracleCounter:
    """Number of single-sample gradient evaluations consumed by one run."""

    calls: int = 0


@dataclass(frozen=True)
class MiniBatch:
    grad: np.ndarray
    count: int


def _check_dim(problem, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"point has shape {x.shape}, problem dimension is {problem.dim}")
    return x


def _noise_single(model: OracleModel, x: np.ndarray, gen: np.random.Generator, n: int):
    """``n`` independent noise vectors, shape (n, d)."""
    d = x.shape[0]
    if model.kind == "additive":
        return (model.sigma / math.sqrt(d)) * gen.standard_normal((n, d))
    G = gen.standard_normal((n, d, d))
    h = gen.standard_normal((n, d))
    return model.scale * (G @ x) + model.b_scale * h


def noise_mean(model: OracleModel, x: np.ndarray, N: int, gen: np.random.Generator) -> np.ndarray:
    """Average of ``N`` oracle noise draws at ``x``."""
    d = x.shape[0]
    if model.noiseless:
        return np.zeros(d)
    if model.sampling == "aggregate":
        return _noise_single(model, x, gen, 1)[0] / math.sqrt(N)
    total = np.zeros(d)
    left = N
    while left > 0:
        n = min(left, _CHUNK)
        total += _noise_single(model, x, gen, n).sum(axis=0)
        left -= n
    return total / N


def sample_gradient(model: OracleModel, problem, x, stream: StreamLike) -> np.ndarray:
    x = _check_dim(problem, x)
    g = problem.true_gradient(x)
    if model.noiseless:
        return g
    return g + _noise_single(model, x, as_generator(stream), 1)[0]


def minibatch_gradient(model: OracleModel, problem, x, N: int, stream: StreamLike,
                       counter: OracleCounter | None = None) -> MiniBatch:
    if N < 1:
        raise ValueError(f"batch size must be >= 1, got {N}")
    x = _check_dim(problem, x)
    g = problem.true_gradient(x)
    if not model.noiseless:
        g = g + noise_mean(model, x, int(N), as_generator(stream))
    if counter is not None:
        counter.calls += int(N)
    return MiniBatch(g, int(N))


def variance_decay_bound(sigma_star: float, sigma_L: float, dist: float, N: int) -> float:
    """Upper bound (sigma(x*) + sigma_L ||x - x*||) / sqrt(N) on the batch error norm."""
    if N < 1:
        raise ValueError(f"batch size must be >= 1, got {N}")
    if min(sigma_star, sigma_L, dist) < 0:
        raise ValueError("arguments must be nonnegative")
    return (sigma_star + sigma_L * dist) / math.sqrt(N)


def _mean_sq_noise(model: OracleModel, x: np.ndarray, M: int, gen: np.random.Generator) -> float:
    if model.noiseless:
        return 0.0
    acc = 0.0
    left = M
    while left > 0:
        n = min(left, _CHUNK)
        e = _noise_single(model, x, gen, n)
        acc += math.fsum(np.einsum("ij,ij->i", e, e))
        left -= n
    return acc / M


def estimate_pointwise_sigma(model: OracleModel, problem, x, M: int, stream: StreamLike) -> float:
    """Monte Carlo sigma(x) from ``M`` single-sample errors against the exact gradient."""
    if M < 2:
        raise ValueError("need at least 2 draws")
    x = _check_dim(problem, x)
    return math.sqrt(_mean_sq_noise(model, x, M, as_generator(stream)))


def estimate_sigma_L(model: OracleModel, problem, anchor, probes: Sequence, M: int,
                     stream) -> float:
    """Largest empirical slope (sigma(x) - sigma(anchor)) / ||x - anchor||, clamped at 0.

    ``stream`` must be an ``RngStream``; each point gets its own child stream.
    """
    if M < 2:
        raise ValueError("need at least 2 draws")
    probes = list(probes)
    if not probes:
        raise ValueError("empty probe list")
    anchor = _check_dim(problem, anchor)
    s_anchor = estimate_pointwise_sigma(model, problem, anchor, M, stream.child(0))
    best = 0.0
    for k, p in enumerate(probes, start=1):
        p = _check_dim(problem, p)
        dist = float(np.linalg.norm(p - anchor))
        if dist == 0.0:
            raise ValueError(f"probe {k - 1} coincides with the anchor")
        s = estimate_pointwise_sigma(model, problem, p, M, stream.child(k))
        best = max(best, (s - s_anchor) / dist)
    return best


def estimate_random_lipschitz(model: OracleModel, problem, M: int, stream: StreamLike) -> float:
    """sqrt(E[||A(xi)||_2^2]) for the random-matrix model (exact per-sample 2-norms)."""
    if model.kind != "random_matrix":
        raise ValueError("random Lipschitz modulus is defined for the random-matrix model only")
    gen = as_generator(stream)
    d = problem.dim
    acc = 0.0
    left = M
    while left > 0:
        n = min(left, 512)
        A = problem.A + model.scale * gen.standard_normal((n, d, d))
        acc += math.fsum(np.linalg.norm(A, ord=2, axis=(1, 2)) ** 2)
        left -= n
    return math.sqrt(acc / M)


def empirical_batch_error(model: OracleModel, problem, x, N: int, M: int,
                          stream: StreamLike) -> float:
    """sqrt of the mean of ||eps_N(x)||^2 over ``M`` mini-batches of ``N`` explicit samples."""
    if N < 1 or M < 1:
        raise ValueError("need N >= 1 and M >= 1")
    x = _check_dim(problem, x)
    if model.noiseless:
        return 0.0
    gen = as_generator(stream)
    d = x.shape[0]
    per = max(1, (1 << 20) // (N * d * (d + 1)))
    acc = 0.0
    left = M
    while left > 0:
        m = min(left, per)
        eps = _noise_single(model, x, gen, m * N).reshape(m, N, d).mean(axis=1)
        acc += math.fsum(np.einsum("ij,ij->i", eps, eps))
        left -= m
    return math.sqrt(acc / M)

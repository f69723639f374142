"""Random streams and streaming statistics shared by every other module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

Vector = np.ndarray

MASK32 = 0xFFFFFFFF
MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class RngStream:
    """A position in a tree of counter-based random streams.

    The stream is stateless: ``generator()`` always returns a fresh Philox
    generator keyed by ``(seed, path)``, so the same pair replays the same
    draws bit for bit and sibling paths give independent sequences.
    """

    seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for p in self.path:
            if not 0 <= p <= MASK32:
                raise ValueError(f"path ids must be 32-bit unsigned integers, got {p}")

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(ss))


def make_stream(seed: int, path: Sequence[int] = ()) -> RngStream:
    return RngStream(int(seed), tuple(int(p) for p in path))


StreamLike = Union[RngStream, np.random.Generator]


def as_generator(stream: StreamLike) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


def gaussian_vector(stream: StreamLike, d: int, mean, stddev: float) -> Vector:
    """Draw a vector with independent ``Normal(mean_i, stddev**2)`` entries."""
    mean = np.asarray(mean, dtype=float)
    if mean.ndim == 0:
        mean = np.full(d, float(mean))
    if mean.shape != (d,):
        raise ValueError(f"mean has shape {mean.shape}, expected ({d},)")
    if stddev < 0:
        raise ValueError("stddev must be nonnegative")
    if stddev == 0:
        return mean.copy()
    return mean + stddev * as_generator(stream).standard_normal(d)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@dataclass
class MomentAccumulator:
    """Welford mean/variance accumulator with compensated updates.

    Works elementwise, so a single accumulator can track a whole per-iteration
    curve (an array) across replications.
    """

    count: int = 0
    mean: np.ndarray | float = 0.0
    m2: np.ndarray | float = 0.0
    _cmean: np.ndarray | float = field(default=0.0, repr=False)
    _cm2: np.ndarray | float = field(default=0.0, repr=False)

    def add(self, x) -> None:
        x = np.asarray(x, dtype=float)
        self.count += 1
        if self.count == 1:
            self.mean = x.copy()
            self.m2 = np.zeros_like(x)
            self._cmean = np.zeros_like(x)
            self._cm2 = np.zeros_like(x)
            return
        delta = x - (self.mean + self._cmean)
        self.mean, err = _two_sum(self.mean, delta / self.count)
        self._cmean = self._cmean + err
        mean = self.mean + self._cmean
        self.m2, err = _two_sum(self.m2, delta * (x - mean))
        self._cm2 = self._cm2 + err

    def _resolved(self):
        return self.mean + self._cmean, self.m2 + self._cm2

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.count == 0:
            mean, m2 = self._resolved()
            return MomentAccumulator(self.count, np.copy(mean), np.copy(m2), 0.0 * mean, 0.0 * m2)
        if self.count == 0:
            return other.merge(self)
        ma, m2a = self._resolved()
        mb, m2b = other._resolved()
        n = self.count + other.count
        delta = mb - ma
        mean = ma + delta * (other.count / n)
        m2 = m2a + m2b + delta * delta * (self.count * other.count / n)
        return MomentAccumulator(n, mean, m2, 0.0 * mean, 0.0 * m2)

    @property
    def variance(self):
        """Unbiased sample variance (zero for a single observation)."""
        _, m2 = self._resolved()
        if self.count < 2:
            return np.zeros_like(m2)
        return np.maximum(m2, 0.0) / (self.count - 1)

    def result(self):
        """Return ``(mean, standard_error)``."""
        if self.count == 0:
            raise ValueError("no observations accumulated")
        mean, _ = self._resolved()
        return mean, np.sqrt(self.variance / self.count)


def moments(values: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error of the mean (0 for a single value)."""
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("moments of an empty sequence")
    # rescale so squared deviations cannot overflow for |x| up to ~1e150
    scale = float(np.max(np.abs(x)))
    if scale == 0.0 or not math.isfinite(scale):
        scale = 1.0
    x = x / scale
    n = x.size
    mean = math.fsum(x) / n
    if n == 1:
        return mean * scale, 0.0
    ss = math.fsum((x - mean) ** 2)
    return mean * scale, math.sqrt(ss / (n - 1) / n) * scale

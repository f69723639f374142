"""Regularizers, constraint sets and the prox-mapping.

``prox_step(reg, cons, y, u, alpha)`` returns

    argmin_{x in X}  <u, x - y> + ||x - y||^2 / (2 alpha) + phi(x)

in closed form.  All functions operate on the last axis, so a stack of
points with shape ``(n, d)`` can be processed in one call (``alpha`` may then
be a scalar or an ``(n, 1)`` array).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REG_KINDS = ("zero", "l1", "squared_l2", "elastic_net")
CONS_KINDS = ("all_space", "box", "ball")

FEAS_TOL = 1e-9


class UnsupportedProxError(ValueError):
    """The (regularizer, constraint) pair has no closed-form prox here."""


@dataclass(frozen=True)
class RegularizerSpec:
    """phi(x) = lam * ||x||^2 + gamma * ||x||_1 restricted to the given kind.

    ``l1`` uses ``lam`` as the l1 weight; ``squared_l2`` uses ``lam`` as the
    squared-norm weight; ``elastic_net`` uses both.
    """

    kind: str = "zero"
    lam: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in REG_KINDS:
            raise ValueError(f"unknown regularizer kind {self.kind!r}; expected one of {REG_KINDS}")
        if self.lam < 0 or self.gamma < 0:
            raise ValueError("regularizer weights must be nonnegative")

    @property
    def l1_weight(self) -> float:
        if self.kind == "l1":
            return self.lam
        if self.kind == "elastic_net":
            return self.gamma
        return 0.0

    @property
    def sq_weight(self) -> float:
        return self.lam if self.kind in ("squared_l2", "elastic_net") else 0.0


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str = "all_space"
    lo: object = None
    hi: object = None
    center: object = None
    radius: float = np.inf

    def __post_init__(self):
        if self.kind not in CONS_KINDS:
            raise ValueError(f"unknown constraint kind {self.kind!r}; expected one of {CONS_KINDS}")
        if self.kind == "box":
            lo, hi = np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float)
            if np.any(lo > hi):
                raise ValueError("empty box: lo > hi")
        if self.kind == "ball" and not self.radius >= 0:
            raise ValueError("ball radius must be nonnegative")

    @staticmethod
    def box(lo, hi) -> "ConstraintSpec":
        return ConstraintSpec("box", lo=lo, hi=hi)

    @staticmethod
    def ball(center, radius: float) -> "ConstraintSpec":
        return ConstraintSpec("ball", center=center, radius=float(radius))

    def project(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "all_space":
            return x
        if self.kind == "box":
            return np.clip(x, self.lo, self.hi)
        center = 0.0 if self.center is None else np.asarray(self.center, dtype=float)
        v = x - center
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            shrink = np.where(nrm > self.radius, self.radius / nrm, 1.0)
        return center + v * shrink

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint violation of ``x`` (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "all_space":
            return 0.0
        if self.kind == "box":
            over = np.maximum(x - self.hi, 0.0)
            under = np.maximum(np.asarray(self.lo, dtype=float) - x, 0.0)
            return float(np.max(np.maximum(over, under), initial=0.0))
        center = 0.0 if self.center is None else np.asarray(self.center, dtype=float)
        return float(max(np.linalg.norm(x - center) - self.radius, 0.0))

    def contains(self, x: np.ndarray, tol: float = FEAS_TOL) -> bool:
        return self.violation(x) <= tol


def supported(reg: RegularizerSpec, cons: ConstraintSpec) -> bool:
    if cons.kind in ("all_space", "box"):
        return reg.kind in REG_KINDS
    if cons.kind == "ball":
        return reg.kind == "zero"
    return False


def check_supported(reg: RegularizerSpec, cons: ConstraintSpec) -> None:
    if not supported(reg, cons):
        raise UnsupportedProxError(
            f"no closed-form prox for regularizer {reg.kind!r} over constraint {cons.kind!r}"
        )


def reg_value(reg: RegularizerSpec, x: np.ndarray):
    x = np.asarray(x, dtype=float)
    val = 0.0
    if reg.sq_weight:
        val = val + reg.sq_weight * np.sum(x * x, axis=-1)
    if reg.l1_weight:
        val = val + reg.l1_weight * np.sum(np.abs(x), axis=-1)
    if np.ndim(val) == 0:
        return float(val)
    return val


def soft_threshold(v: np.ndarray, thresh) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def prox_step(reg: RegularizerSpec, cons: ConstraintSpec, y, u, alpha) -> np.ndarray:
    """Closed-form prox-mapping of ``alpha * phi`` over ``X`` at ``y - alpha*u``."""
    check_supported(reg, cons)
    if np.any(np.asarray(alpha) <= 0):
        raise ValueError("prox stepsize alpha must be positive")
    v = np.asarray(y, dtype=float) - alpha * np.asarray(u, dtype=float)
    if reg.l1_weight:
        v = soft_threshold(v, alpha * reg.l1_weight)
    if reg.sq_weight:
        v = v / (1.0 + 2.0 * alpha * reg.sq_weight)
    # separable regularizers: clamping the 1-d minimizer is exact on a box
    return cons.project(v)

"""Stepsize / extrapolation / batch-size policies and the rate-bound calculators.

Smooth convex case (accelerated method)::

    alpha_t = mu / (L + a / sqrt(N0))
    beta_t  = (1 + t) / 2                       ("linear")
    N_t     = N0 * floor((t + 2 + delta)^3 * ln(t + 2 + delta)^(1 + 2b))

Strongly convex case (proximal gradient)::

    alpha = mu / L,   N_t = N0 * floor(zeta^-t),
    rho   = max(1 - mu c / (2L) + phi, zeta)

Batch sizes are evaluated with mpmath before flooring so the integer counts
are exact even when the float product sits next to an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np

BETA_VARIANTS = ("linear", "exact")

_MP_DPS = 40
_EXACT_DPS = 60


def _mp(x) -> mpmath.mpf:
    return mpmath.mpf(x)


# -- extrapolation weights ---------------------------------------------------

_exact_betas: list = []


def exact_beta_sequence(n: int) -> list:
    """beta_1..beta_n of the recursion beta_{t+1} = (1 + sqrt(1 + 4 beta_t^2)) / 2 (mpmath)."""
    with mpmath.workdps(_EXACT_DPS):
        if not _exact_betas:
            _exact_betas.append(mpmath.mpf(1))
        while len(_exact_betas) < n:
            bt = _exact_betas[-1]
            _exact_betas.append((1 + mpmath.sqrt(1 + 4 * bt * bt)) / 2)
    return _exact_betas[:n]


def fista_beta(t: int, variant: str = "linear") -> float:
    if t < 1:
        raise ValueError(f"beta_t is defined for t >= 1, got {t}")
    if variant == "linear":
        return (1 + t) / 2.0
    if variant == "exact":
        return float(exact_beta_sequence(t)[t - 1])
    raise ValueError(f"unknown beta variant {variant!r}; expected one of {BETA_VARIANTS}")


# -- batch sizes -------------------------------------------------------------

@lru_cache(maxsize=None)
def smooth_batch(t: int, N0: int, b: float, delta: float) -> int:
    if t < 1 or N0 < 1 or not b > 0 or delta < 0:
        raise ValueError(f"invalid smooth batch parameters t={t}, N0={N0}, b={b}, delta={delta}")
    with mpmath.workdps(_MP_DPS):
        u = t + 2 + _mp(delta)
        val = u**3 * mpmath.log(u) ** (1 + 2 * _mp(b))
        return int(N0) * int(mpmath.floor(val))


@lru_cache(maxsize=None)
def strong_batch(t: int, N0: int, zeta: float) -> int:
    if t < 1 or N0 < 1 or not 0 < zeta < 1:
        raise ValueError(f"invalid strong batch parameters t={t}, N0={N0}, zeta={zeta}")
    with mpmath.workdps(_MP_DPS):
        return int(N0) * int(mpmath.floor(_mp(zeta) ** (-t)))


def cumulative_smooth_batches(T: int, N0: int, b: float, delta: float) -> int:
    return sum(smooth_batch(t, N0, b, delta) for t in range(1, T + 1))


def smooth_alpha(mu: float, L: float, a: float, N0: int) -> float:
    return mu / (L + a / math.sqrt(N0))


# -- policies ----------------------------------------------------------------

@dataclass(frozen=True)
class SmoothPolicy:
    """Schedule for the accelerated method. ``a`` defaults to ``L``."""

    L: float
    mu: float = 0.5
    a: Optional[float] = None
    b: float = 0.5
    delta: float = 44.0
    N0: int = 2
    beta_variant: str = "linear"
    phi: float = 0.5

    def __post_init__(self):
        if self.a is None:
            object.__setattr__(self, "a", float(self.L))
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if not self.a > 0 or not self.b > 0 or self.delta < 0:
            raise ValueError("need a > 0, b > 0 and delta >= 0")
        if int(self.N0) != self.N0 or self.N0 < 1:
            raise ValueError("N0 must be a positive integer")
        if self.beta_variant not in BETA_VARIANTS:
            raise ValueError(f"unknown beta variant {self.beta_variant!r}")
        if not 0 < self.phi < 1:
            raise ValueError(f"phi must lie in (0, 1), got {self.phi}")
        if not self.alpha(1) * self.L < 1:
            raise ValueError("stepsize must satisfy alpha < 1/L")

    def alpha(self, t: int = 1) -> float:
        return smooth_alpha(self.mu, self.L, self.a, self.N0)

    def beta(self, t: int) -> float:
        return fista_beta(t, self.beta_variant)

    def batch(self, t: int) -> int:
        return smooth_batch(t, int(self.N0), self.b, self.delta)

    def t0(self, sigma_L: float) -> int:
        return t0_smooth(self.phi, int(self.N0), self.b, self.delta, self.alpha(1) * sigma_L)


@dataclass(frozen=True)
class StrongPolicy:
    L: float
    c: float
    mu: float = 0.5
    zeta: float = 0.9
    N0: int = 1
    phi_exo: float = 0.01

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("the strongly convex policy needs c > 0")
        if not self.L >= self.c:
            raise ValueError("need L >= c")
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu}")
        if int(self.N0) != self.N0 or self.N0 < 1:
            raise ValueError("N0 must be a positive integer")
        contraction_rho(self.mu, self.c, self.L, self.phi_exo, self.zeta)

    @property
    def lam(self) -> float:
        return 1.0 - self.c * self.alpha()

    def alpha(self, t: int = 1) -> float:
        return self.mu / self.L

    def batch(self, t: int) -> int:
        return strong_batch(t, int(self.N0), self.zeta)

    @property
    def rho(self) -> float:
        return contraction_rho(self.mu, self.c, self.L, self.phi_exo, self.zeta)

    def delta_aux(self, sigma_L: float) -> float:
        a = self.alpha()
        return 2 * (a * sigma_L) ** 2 / ((1 - self.L * a) * self.N0)

    def beta_aux(self, sigma_star: float) -> float:
        a = self.alpha()
        return 2 * a * a * sigma_star**2 / ((1 - self.L * a) * self.N0)

    def t0(self, sigma_L: float) -> int:
        return t0_strong(self.mu, self.phi_exo, self.zeta, int(self.N0), sigma_L, self.L)

    @classmethod
    def matched(cls, L: float, c: float, mu: float, phi_exo: float, a_frac: float,
                N0: int = 1) -> "StrongPolicy":
        return cls(L=L, c=c, mu=mu, zeta=matched_zeta(mu, c, L, phi_exo, a_frac), N0=N0,
                   phi_exo=phi_exo)


# -- threshold iterations ----------------------------------------------------

def t0_smooth(phi_exo: float, N0: int, b: float, delta: float, alpha1_sigmaL: float) -> int:
    """ceil(exp{(15 (alpha_1 sigma_L)^2 / (8 phi N0 b))^(1/(2b))} - 1 - delta), at least 1."""
    if not 0 < phi_exo < 1 or N0 < 1 or not b > 0 or delta < 0 or alpha1_sigmaL < 0:
        raise ValueError("invalid t0 parameters")
    if alpha1_sigmaL == 0:
        return 1
    with mpmath.workdps(_MP_DPS):
        inner = 15 * _mp(alpha1_sigmaL) ** 2 / (8 * _mp(phi_exo) * N0 * _mp(b))
        val = mpmath.exp(inner ** (1 / (2 * _mp(b)))) - 1 - _mp(delta)
        return max(int(mpmath.ceil(val)), 1)


def t0_strong(mu: float, phi_exo: float, zeta: float, N0: int, sigma_L: float, L: float) -> int:
    """ceil(log_{1/zeta}(2 mu^2 sigma_L^2 / ((1 - mu) phi N0 L^2))), at least 1."""
    if not 0 < mu < 1 or not phi_exo > 0 or not 0 < zeta < 1 or N0 < 1 or sigma_L < 0 or not L > 0:
        raise ValueError("invalid t0 parameters")
    if sigma_L == 0:
        return 1
    with mpmath.workdps(_MP_DPS):
        arg = 2 * _mp(mu) ** 2 / ((1 - _mp(mu)) * _mp(phi_exo) * N0) * (_mp(sigma_L) / _mp(L)) ** 2
        val = mpmath.log(arg) / mpmath.log(1 / _mp(zeta))
        return max(int(mpmath.ceil(val)), 1)


# -- contraction and matched sampling rate -----------------------------------

def contraction_rho(mu: float, c: float, L: float, phi_exo: float, zeta: float) -> float:
    if not 0 < zeta < 1:
        raise ValueError(f"zeta must lie in (0, 1), got {zeta}")
    cap = mu * c / (2 * L)
    if not 0 < phi_exo < cap:
        raise ValueError(
            f"phi_exo={phi_exo} must lie in (0, mu c / (2L)) = (0, {cap:.6g}); otherwise rho >= 1")
    return max(1 - cap + phi_exo, zeta)


def max_matched_fraction(mu: float, c: float, L: float, phi_exo: float) -> float:
    cap = mu * c / (2 * L)
    return (cap - phi_exo) / (cap + phi_exo)


def matched_zeta(mu: float, c: float, L: float, phi_exo: float, a_frac: float) -> float:
    """zeta = 1 - a (mu c / (2L) + phi), validated so that rho equals zeta."""
    cap = mu * c / (2 * L)
    if not 0 < phi_exo < cap:
        raise ValueError(f"phi_exo={phi_exo} must lie in (0, {cap:.6g})")
    if not 0 < a_frac <= 1:
        raise ValueError("a_frac must lie in (0, 1]")
    zeta = 1 - a_frac * (cap + phi_exo)
    if zeta < 1 - cap + phi_exo:
        raise ValueError(
            f"a_frac={a_frac} gives zeta={zeta:.6g} < 1 - mu c/(2L) + phi = {1 - cap + phi_exo:.6g}, "
            f"so rho != zeta; admissible a_frac <= {max_matched_fraction(mu, c, L, phi_exo):.6g}")
    return zeta


# -- certificates --------------------------------------------------------------

def smooth_tail_sum(alpha: float, L: float, N0: int, b: float, delta: float, t0: int,
                    t_max: int = 10**6) -> float:
    """Upper estimate of sum_{t >= t0} alpha^2 beta_{t+1}^2 / ((1 - L alpha) N_{t+1}).

    Terms up to ``t_max`` are summed explicitly (linear weights), the rest is
    bounded by the integral of 1 / (u ln(u)^(1+2b)).
    """
    if not alpha * L < 1:
        raise ValueError("need alpha < 1/L")
    lead = alpha**2 / (1 - L * alpha)
    total = 0.0
    if t0 <= t_max:
        t = np.arange(t0, t_max + 1, dtype=float)
        u = t + 3 + delta
        N = N0 * np.floor(u**3 * np.log(u) ** (1 + 2 * b))
        total = math.fsum(lead * ((t + 2) / 2) ** 2 / N)
    start = max(t_max, t0 - 1)
    U = start + 3 + delta
    remainder = lead / (4 * N0) / (2 * b * math.log(U) ** (2 * b))
    return total + remainder * (1 + 1e-9)


def strong_certificate_ok(policy: StrongPolicy, sigma_L: float, t0: int | None = None,
                          horizon: int = 1000) -> bool:
    """delta_aux zeta^t0 <= phi and lambda + delta_aux zeta^t < rho for t0 <= t < t0 + horizon."""
    t0 = policy.t0(sigma_L) if t0 is None else t0
    dl = policy.delta_aux(sigma_L)
    if dl * policy.zeta**t0 > policy.phi_exo * (1 + 1e-12):
        return False
    t = np.arange(t0, t0 + horizon, dtype=float)
    return bool(np.all(policy.lam + dl * policy.zeta**t < policy.rho))


# -- bound calculators --------------------------------------------------------

@dataclass
class BoundReport:
    """Evaluated theoretical quantities; ``None`` marks a quantity that does not apply."""

    t0: int
    rho: Optional[float] = None
    J: Optional[float] = None
    C: Optional[float] = None
    C0: Optional[float] = None
    C1: Optional[float] = None
    gamma: Optional[float] = None
    Q: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("t0", "rho", "J", "C", "C0", "C1", "gamma", "Q")}
        out.update(self.extra)
        return out


def theorem1_bound(t: int, gap1: float, s1_dist_sq: float, sigma_star: float, sigma_L: float,
                   J: float, mu: float, a: float, b: float, delta: float, N0: int,
                   L: float) -> float:
    """Right-hand side of the O((t+2)^-2) bound on E[g(z^{t+1}) - g*]."""
    if t < 1 or J < 0 or not 0 < mu < 1 or not a > 0 or not b > 0 or delta < 0 or N0 < 1 or not L > 0:
        raise ValueError("invalid parameters for the accelerated-method bound")
    K = L / mu + a / (mu * math.sqrt(N0))
    logf = math.log(2 + delta) ** (2 * b)
    denom = (t + 2) ** 2
    noise_star = K * 3 * mu**2 / (4 * (1 - mu) * a**2 * b * logf) * sigma_star**2
    noise_mult = K * 15 * mu**2 / (4 * (1 - mu) * N0 * b * logf) * (sigma_L / L) ** 2 * J
    return (4 * gap1 + 2 * K * s1_dist_sq + noise_star + noise_mult) / denom


def prop2_bound(alpha_t0: float, beta_t0, gaps_upto_t0, s_t0_dist_sq, sigma_star: float,
                sigma_L: float, gamma: float) -> float:
    """Bound on sup_t E||z^t - x*||^2 for the accelerated method.

    ``beta_t0``, ``gaps_upto_t0`` and ``s_t0_dist_sq`` may be scalars or
    sequences over t = 1..t0; the numerator takes the max over t of
    ``2 alpha beta_t^2 E[g(z^t) - g*] + E||s^t - x*||^2``.  The
    additive noise term is ``sigma(x*)^2 / (3 sigma_L^2)``.  With
    ``sigma_L == 0`` there is no multiplicative term and the denominator is 1.
    """
    beta = np.atleast_1d(np.asarray(beta_t0, dtype=float))
    v = np.atleast_1d(np.asarray(gaps_upto_t0, dtype=float))
    s = np.atleast_1d(np.asarray(s_t0_dist_sq, dtype=float))
    head = float(np.max(2 * alpha_t0 * beta**2 * v + s))
    if sigma_L == 0:
        return head
    cap = 1 / (15 * sigma_L**2)
    if not 0 <= gamma < cap:
        raise ValueError(f"gamma={gamma} must lie in [0, 1/(15 sigma_L^2)) = [0, {cap:.6g})")
    return (head + sigma_star**2 / (3 * sigma_L**2)) / (1 - 15 * gamma * sigma_L**2)


def theorem2_constants(x1_dist_sq: float, max_dist_sq_before_t0: float, dist_sq_at_t0: float,
                       mu: float, c: float, L: float, N0: int, sigma_star: float, sigma_L: float,
                       phi_exo: float, t0: int, zeta: float | None = None) -> BoundReport:
    """Constants C, C0, C1 of the linear rate E||x^{t+1} - x*||^2 <= C rho^{t+1}.

    ``max_dist_sq_before_t0`` is max_{tau in [t0 - 1]} E||x^tau - x*||^2 and
    must be 0 when t0 = 1 (empty range).
    """
    if not c > 0 or not L > 0 or not 0 < mu < 1 or N0 < 1 or t0 < 1:
        raise ValueError("invalid parameters for the strongly convex constants")
    if mu * c / L >= 1:
        raise ValueError("need mu c / L < 1")
    if t0 == 1:
        max_dist_sq_before_t0 = 0.0
    lam = 1 - mu * c / L
    k = 4 * mu / ((1 - mu) * N0 * L * c)
    Q = sigma_L**2 * max_dist_sq_before_t0
    C = x1_dist_sq / lam + k * (Q + 2 * sigma_star**2)
    C0 = (lam + phi_exo) ** (-t0) * dist_sq_at_t0 + k * sigma_star**2
    C1 = x1_dist_sq / lam + k * Q + k * sigma_star**2
    rho = None if zeta is None else contraction_rho(mu, c, L, phi_exo, zeta)
    return BoundReport(t0=t0, rho=rho, C=C, C0=C0, C1=C1, Q=Q)

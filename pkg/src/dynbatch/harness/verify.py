"""Verification suites: property checks and theory audits with measured values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from ..numeric import make_stream
from ..oracle import OracleModel, empirical_batch_error, variance_decay_bound
from ..problems import deterministic_fista, make_quadratic, make_random_quadratic
from ..prox import ConstraintSpec, RegularizerSpec, prox_step, reg_value
from ..schedules import (SmoothPolicy, StrongPolicy, contraction_rho, cumulative_smooth_batches,
                         exact_beta_sequence, matched_zeta, max_matched_fraction,
                         smooth_tail_sum, strong_certificate_ok, t0_smooth, theorem1_bound)
from ..solvers import RecordOptions, run_accelerated, run_prox_gradient
from . import presets
from .analysis import complexity_curve, complexity_slope, fit_geometric_rate, fit_power_rate
from .runner import run_experiment


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        val = f" value={self.value}" if self.value is not None else ""
        return f"{tag} {self.name}{val}{(' ' + self.detail) if self.detail else ''}"


@dataclass
class Report:
    suite: str
    seed: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, value=None, detail: str = "") -> Check:
        c = Check(name, bool(passed), value, detail)
        self.checks.append(c)
        return c

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _g(x) -> str:
    return format(float(x), ".6g")


# -- prox ----------------------------------------------------------------------

_REGS = (RegularizerSpec("zero"), RegularizerSpec("l1", 0.7), RegularizerSpec("squared_l2", 0.4),
         RegularizerSpec("elastic_net", 0.3, 0.5))


def _combos(d: int):
    box = ConstraintSpec.box(np.full(d, -0.8), np.full(d, 1.2))
    ball = ConstraintSpec.ball(np.full(d, 0.1), 1.5)
    out = [(r, ConstraintSpec()) for r in _REGS] + [(r, box) for r in _REGS]
    return out + [(RegularizerSpec(), ball)]


def three_point_violations(reg, cons, n: int, d: int, rng: np.random.Generator,
                           tol: float = 1e-9) -> tuple[int, float]:
    """Count of three-point inequality failures over ``n`` random (y, u, alpha, x) tuples."""
    y = cons.project(rng.normal(scale=2.0, size=(n, d)))
    x = cons.project(rng.normal(scale=2.0, size=(n, d)))
    u = rng.normal(scale=2.0, size=(n, d))
    alpha = np.exp(rng.uniform(math.log(1e-2), math.log(10.0), size=(n, 1)))
    z = prox_step(reg, cons, y, u, alpha)
    a = alpha[:, 0]

    def p(w):
        return np.einsum("ij,ij->i", u, w) + reg_value(reg, w)

    def sq(w):
        return np.einsum("ij,ij->i", w, w)

    lhs = p(z) + sq(z - y) / (2 * a)
    rhs = p(x) + sq(x - y) / (2 * a) - sq(x - z) / (2 * a)
    excess = lhs - rhs
    return int(np.sum(excess > tol)), float(np.max(excess))


def grid_prox_error(reg, cons, y: float, u: float, alpha: float, grid: np.ndarray) -> float:
    """|closed-form prox - brute-force grid minimizer| in one dimension."""
    pts = grid
    if cons.kind == "box":
        pts = grid[(grid >= float(np.ravel(cons.lo)[0])) & (grid <= float(np.ravel(cons.hi)[0]))]
    obj = u * (pts - y) + (pts - y) ** 2 / (2 * alpha) + reg_value(reg, pts[:, None])
    best = pts[int(np.argmin(obj))]
    z = prox_step(reg, cons, np.array([y]), np.array([u]), alpha)[0]
    return abs(float(z) - float(best))


def suite_prox(seed: int = 0, n_cases: int = 10**6, grid_points: int = 4_000_001,
               grid_cases: int = 10) -> Report:
    rep = Report("prox", seed)
    rng = np.random.default_rng([seed, 901])
    d = 4
    combos = _combos(d)
    per = -(-n_cases // len(combos))
    total_bad, total, worst = 0, 0, -math.inf
    chunk = 200_000
    for reg, cons in combos:
        left = per
        while left > 0:
            m = min(left, chunk)
            bad, w = three_point_violations(reg, cons, m, d, rng)
            total_bad += bad
            worst = max(worst, w)
            total += m
            left -= m
    rep.add("three_point_inequality", total_bad == 0, total_bad,
            f"cases={total} max_excess={_g(worst)} tol=1e-9")

    # nonexpansiveness on random pairs
    bad = 0
    for reg, cons in combos:
        n = 10**5 // len(combos)
        y, y2 = rng.normal(size=(2, n, d))
        u, u2 = rng.normal(size=(2, n, d))
        a = 0.7
        lhs = np.linalg.norm(prox_step(reg, cons, y, u, a) - prox_step(reg, cons, y2, u2, a), axis=1)
        rhs = np.linalg.norm((y - a * u) - (y2 - a * u2), axis=1)
        bad += int(np.sum(lhs > rhs + 1e-12))
    rep.add("nonexpansive", bad == 0, bad)

    grid = np.linspace(-2.0, 2.0, grid_points)
    res = float(grid[1] - grid[0])
    box1 = ConstraintSpec.box(np.array([-0.5]), np.array([0.6]))
    worst = 0.0
    for reg in _REGS:
        for cons in (ConstraintSpec(), box1):
            for _ in range(grid_cases):
                alpha = float(rng.uniform(0.2, 2.0))
                y = float(rng.uniform(-1.0, 1.0))
                u = float(rng.uniform(-0.5, 0.5)) / alpha
                worst = max(worst, grid_prox_error(reg, cons, y, u, alpha, grid))
    rep.add("grid_oracle_1d", worst <= 1.5 * res, _g(worst), f"resolution={_g(res)}")
    return rep


# -- oracle ---------------------------------------------------------------------

def suite_oracle(seed: int = 0, M: int = 10_000, Ns=(1, 4, 16, 64, 256), d: int = 8) -> Report:
    rep = Report("oracle", seed)
    model = OracleModel("random_matrix", scale=0.3, vector_scale=0.5, sampling="explicit")
    prob = make_random_quadratic(d, {"L": 2.0, "c": 0.2}, model, seed=seed + 3, rotate=True)
    rng = np.random.default_rng([seed, 17])
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    points = [prob.x_star, prob.x_star + u, prob.x_star + 3.0 * u]
    root = make_stream(seed, (7,))
    worst_ratio_to_bound, ratios = 0.0, []
    bound_ok, ratio_ok = True, True
    for i, x in enumerate(points):
        dist = float(np.linalg.norm(x - prob.x_star))
        errs = []
        for k, N in enumerate(Ns):
            e = empirical_batch_error(model, prob, x, N, M, root.child(i, k))
            b = variance_decay_bound(prob.sigma_star, prob.sigma_L, dist, N)
            worst_ratio_to_bound = max(worst_ratio_to_bound, e / b)
            bound_ok &= e <= 1.05 * b
            errs.append(e)
        for k in range(len(Ns) - 1):
            r = errs[k] / errs[k + 1]
            ratios.append(r)
            ratio_ok &= 1.7 <= r <= 2.3
    rep.add("decay_bound", bound_ok, _g(worst_ratio_to_bound), "max err/bound, need <= 1.05")
    rep.add("halving_per_4x", ratio_ok, f"[{_g(min(ratios))}, {_g(max(ratios))}]",
            "err(N)/err(4N) in [1.7, 2.3]")
    return rep


# -- schedules ------------------------------------------------------------------

def _random_smooth(rng):
    L = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
    pol = SmoothPolicy(L=L, mu=float(rng.uniform(0.05, 0.95)),
                       a=L * float(np.exp(rng.uniform(math.log(0.1), math.log(10.0)))),
                       b=float(rng.uniform(0.5, 1.0)), delta=float(rng.uniform(0.0, 50.0)),
                       N0=int(rng.integers(1, 9)), phi=float(rng.uniform(0.2, 0.9)))
    sigma_L = L * float(rng.uniform(0.1, 2.0))
    return pol, sigma_L


def _random_strong(rng):
    L = float(np.exp(rng.uniform(math.log(0.1), math.log(10.0))))
    c = L / float(np.exp(rng.uniform(0.0, math.log(100.0))))
    mu = float(rng.uniform(0.05, 0.95))
    cap = mu * c / (2 * L)
    phi = cap * float(rng.uniform(0.05, 0.95))
    zeta = float(rng.uniform(0.05, 0.99))
    pol = StrongPolicy(L=L, c=c, mu=mu, zeta=zeta, N0=int(rng.integers(1, 9)), phi_exo=phi)
    return pol, L * float(rng.uniform(0.0, 3.0))


def smooth_t0_certificate(policy: SmoothPolicy, sigma_L: float) -> tuple[bool, float]:
    """Tail mass from t0 over its allowance phi / (15 sigma_L^2)."""
    t0 = policy.t0(sigma_L)
    tail = smooth_tail_sum(policy.alpha(1), policy.L, int(policy.N0), policy.b, policy.delta, t0)
    ratio = tail / (policy.phi / (15 * sigma_L**2))
    return ratio <= 1.0, ratio


def exact_beta_max_residual(T: int) -> float:
    betas = exact_beta_sequence(T + 1)
    with mpmath.workdps(60):
        worst = max(abs(betas[t] ** 2 - betas[t] - betas[t - 1] ** 2) for t in range(1, T + 1))
    return float(worst)


def suite_schedules(seed: int = 0, draws: int = 100, beta_T: int = 10**5) -> Report:
    rep = Report("schedules", seed)
    rng = np.random.default_rng([seed, 11])
    fails, worst = 0, 0.0
    for _ in range(draws):
        pol, sL = _random_smooth(rng)
        ok, ratio = smooth_t0_certificate(pol, sL)
        fails += not ok
        worst = max(worst, ratio)
    rep.add("t0_smooth_certificate", fails == 0, f"{draws - fails}/{draws}",
            f"max tail/allowance={_g(worst)}")
    fails = 0
    for _ in range(draws):
        pol, sL = _random_strong(rng)
        fails += not strong_certificate_ok(pol, sL)
    rep.add("t0_strong_certificate", fails == 0, f"{draws - fails}/{draws}")
    fails = 0
    for _ in range(draws):
        L = 1.0
        c = float(rng.uniform(0.01, 1.0))
        mu = float(rng.uniform(0.05, 0.95))
        phi = mu * c / (2 * L) * float(rng.uniform(0.05, 0.95))
        a = max_matched_fraction(mu, c, L, phi) * float(rng.uniform(0.01, 1.0))
        z = matched_zeta(mu, c, L, phi, a)
        fails += contraction_rho(mu, c, L, phi, z) != z
    rep.add("matched_zeta_gives_rho", fails == 0, f"{draws - fails}/{draws}")

    t = np.arange(1, beta_T + 1, dtype=float)
    bt, bn = (1 + t) / 2, (2 + t) / 2
    resid = bn * bn - bn - bt * bt
    rep.add("linear_beta_residual", bool(np.all(resid == -0.25)), _g(resid.max()),
            f"t <= {beta_T}")
    worst = exact_beta_max_residual(beta_T)
    rep.add("exact_beta_residual", worst <= 1e-12, _g(worst), f"t <= {beta_T}, 60 digits")

    t_clamp = t0_smooth(0.5, 2, 0.5, 44.0, 1.0)
    t_open = t0_smooth(0.5, 2, 0.5, 0.0, 1.0)
    rep.add("t0_clamp_delta44", t_clamp == 1 and t_open == 42, f"{t_clamp} (delta=0: {t_open})")

    ratios = []
    for T in (10**2, 10**3, 10**4):
        ratios.append(cumulative_smooth_batches(T, 2, 0.5, 44.0) / (T**4 * math.log(T) ** 2))
    rep.add("batch_growth_law", all(0.1 <= r <= 10 for r in ratios),
            "[" + ", ".join(_g(r) for r in ratios) + "]", "sum N / (T^4 ln^2 T), T=1e2..1e4")
    return rep


# -- accelerated method audits ---------------------------------------------------

def zero_noise_bitwise(T: int = 200, d: int = 12, seed: int = 0) -> bool:
    """Noiseless accelerated run equals exact-gradient FISTA bit for bit."""
    prob = make_random_quadratic(d, {"L": 2.0, "rank_deficient": True, "null_dim": 3},
                                 OracleModel("random_matrix", scale=0.0),
                                 ConstraintSpec.box(np.full(d, -0.3), np.full(d, 0.3)),
                                 RegularizerSpec("elastic_net", 0.05, 0.01), seed=seed, rotate=True)
    pol = SmoothPolicy(L=prob.L)
    tr = run_accelerated(prob, None, pol, T, None, make_stream(seed, (0,)),
                         RecordOptions(store_iterates=True))
    ref = deterministic_fista(prob.A, prob.b, prob.reg, prob.cons, np.zeros(d), pol.alpha(1), T)
    return tr.status == "completed" and np.array_equal(tr.iterates, np.array(ref))


def suite_theorem1(seed: int = 0, reps: int = 50, T: int = 300, mart_reps: int = 200,
                   mart_T: int = 100, jobs: int = 1) -> Report:
    rep = Report("theorem1", seed)
    res = run_experiment(presets.smooth_multiplicative(T=T, reps=reps, seed=seed), jobs=jobs)
    lo = min(30, T // 10)
    slope, r2 = fit_power_rate(res.t, res.gap_mean, (lo, T))
    rep.add("gap_rate_exponent", -2.4 <= slope <= -1.6, _g(slope), f"r2={_g(r2)} window=[{lo}, {T}]")

    J = res.bound.J
    c = res.constants
    pol = res.config.policy
    bounds = np.array([theorem1_bound(t, res.gap_mean[0], res.s_dist_sq_mean[0], c["sigma_star"],
                                      c["sigma_L"], J, pol.mu, c["L"] if pol.a is None else pol.a,
                                      pol.b, pol.delta, pol.N0, c["L"]) for t in res.t])
    ratio = res.gap_mean[1:] / bounds[1:]
    rep.add("gap_bound_audit", bool(np.all(ratio <= 2.0)), _g(ratio.max()),
            f"max gap_mean(t)/bound(t), t in [2, {T}], J={_g(J)}")

    free = run_experiment(presets.smooth_multiplicative(T=T, reps=reps, seed=seed,
                                                        constraint="all_space"), jobs=jobs)
    hi = min(200, T)
    r = free.gap_mean[hi - 1] / free.gap_mean[min(10, T) - 1]
    rep.add("unbounded_variance_decay", r <= 1 / 50 and free.failures == 0, _g(r),
            f"gap({hi})/gap(10), failures={free.failures}")
    l2 = float(np.max(free.dist_sq_mean / free.bound.J))
    rep.add("l2_boundedness", l2 <= 2.0, _g(l2), "max E||z-x*||^2 / J")

    mart = run_experiment(presets.smooth_multiplicative(T=mart_T, reps=mart_reps, seed=seed,
                                                        constraint="all_space"), jobs=jobs)
    se = mart.dM_se
    ok = np.abs(mart.dM_mean) <= 3.5 * se
    frac = float(np.mean(ok))
    rep.add("martingale_increments", frac >= 0.95, _g(frac),
            f"fraction of t with |mean dM| <= 3.5 se, reps={mart_reps}")
    same = zero_noise_bitwise(seed=seed)
    rep.add("zero_noise_bitwise", same, "identical" if same else "differs", "200 iterations")
    return rep


# -- strongly convex audits ------------------------------------------------------

def zero_noise_contraction(T: int = 100) -> float:
    """Largest relative deviation of the per-step distance ratio from 1 - mu c / L."""
    eig = np.array([2.0, 1.3, 0.7, 0.4, 0.25])
    prob = make_quadratic(np.diag(eig), np.zeros(5), OracleModel("random_matrix", scale=0.0))
    pol = StrongPolicy(L=prob.L, c=prob.c, mu=0.5, zeta=0.95, N0=1, phi_exo=0.01)
    x1 = np.zeros(5)
    x1[-1] = 3.0
    tr = run_prox_gradient(prob, None, pol, T, None, make_stream(0, (0,)), x0=x1)
    dist = np.sqrt(np.concatenate([[tr.init_dist_sq], tr.dist_sq]))
    target = 1 - pol.mu * prob.c / prob.L
    return float(np.max(np.abs(dist[1:] / dist[:-1] / target - 1)))


def suite_theorem2(seed: int = 0, reps: int = 50, T: int = 100, jobs: int = 1) -> Report:
    rep = Report("theorem2", seed)
    res = run_experiment(presets.strong_linear_rate(T=T, reps=reps, seed=seed), jobs=jobs)
    b = res.bound
    ratio = res.dist_sq_mean / res.bound_curve
    rep.add("linear_rate_bound", bool(np.all(ratio <= 1.0)), _g(np.nanmax(ratio)),
            f"max dist_sq(t+1)/(C rho^(t+1)), C={_g(b.C)}, rho={_g(b.rho)}, t0={b.t0}")
    q, r2 = fit_geometric_rate(res.t, res.dist_sq_mean)
    rep.add("geometric_ratio", q <= b.rho + 0.02, _g(q), f"rho={_g(b.rho)} r2={_g(r2)}")
    dev = zero_noise_contraction()
    rep.add("zero_noise_contraction", dev <= 1e-12, _g(dev), "relative, per step")
    return rep


# -- oracle complexity ---------------------------------------------------------------

def suite_complexity(seed: int = 0, jobs: int = 1) -> Report:
    rep = Report("complexity", seed)
    strong = run_experiment(presets.strong_complexity(seed=seed), jobs=jobs)
    rows = complexity_curve(strong, [1e-1, 1e-2, 1e-3, 1e-4])
    reached = all(r.reached for r in rows)
    s = complexity_slope(rows) if sum(r.reached for r in rows) >= 2 else math.nan
    rep.add("strong_complexity_slope", reached and 0.8 <= s <= 1.2, _g(s),
            "T_hit=" + ",".join(str(r.T_hit) for r in rows))
    smooth = run_experiment(presets.smooth_complexity(seed=seed), jobs=jobs)
    rows = complexity_curve(smooth, [1e-1, 1e-2, 1e-3])
    reached = all(r.reached for r in rows)
    s = complexity_slope(rows) if sum(r.reached for r in rows) >= 2 else math.nan
    rep.add("smooth_complexity_slope", reached and 1.6 <= s <= 2.4, _g(s),
            "T_hit=" + ",".join(str(r.T_hit) for r in rows))
    return rep


SUITES: dict[str, Callable[..., Report]] = {
    "prox": suite_prox,
    "oracle": suite_oracle,
    "schedules": suite_schedules,
    "theorem1": suite_theorem1,
    "theorem2": suite_theorem2,
    "complexity": suite_complexity,
}


def verify(suite_name: str, seed: int = 0, **kwargs) -> Report:
    if suite_name not in SUITES:
        raise ValueError(f"unknown suite {suite_name!r}; valid suites: {', '.join(SUITES)}")
    return SUITES[suite_name](seed=seed, **kwargs)

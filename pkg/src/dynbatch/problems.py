"""Synthetic composite quadratic problems with exact ground truth.

g(x) = f(x) + phi(x) over X, with f(x) = 0.5 <x, A x> + <b, x> and A
symmetric positive semidefinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracle import OracleModel
from .prox import ConstraintSpec, RegularizerSpec, check_supported, prox_step, reg_value

EIG_TOL = 1e-12


class InfeasiblePointError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    A: np.ndarray
    b: np.ndarray
    reg: RegularizerSpec
    cons: ConstraintSpec
    oracle: OracleModel
    L: float
    c: float
    x_star: np.ndarray
    g_star: float
    sigma_star: float
    sigma_L: float
    spec: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.b.shape[0]

    @property
    def kappa(self) -> float:
        return self.L / self.c if self.c > 0 else math.inf

    @property
    def strongly_convex(self) -> bool:
        return self.c > 0

    def f(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (self.A @ x) + self.b @ x)

    def g(self, x) -> float:
        return self.f(x) + reg_value(self.reg, x)

    def true_gradient(self, x) -> np.ndarray:
        return true_gradient(self, x)


def true_gradient(problem: ProblemInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"point has shape {x.shape}, problem dimension is {problem.dim}")
    return problem.A @ x + problem.b


def gap(problem: ProblemInstance, x) -> float:
    """g(x) - g*, evaluated around x* to avoid cancellation."""
    x = np.asarray(x, dtype=float)
    if x.shape != (problem.dim,):
        raise ValueError(f"point has shape {x.shape}, problem dimension is {problem.dim}")
    viol = problem.cons.violation(x)
    if viol > 1e-9:
        raise InfeasiblePointError(f"point violates the {problem.cons.kind} constraint by {viol:.3e}")
    dx = x - problem.x_star
    grad_star = problem.A @ problem.x_star + problem.b
    df = float(grad_star @ dx + 0.5 * dx @ (problem.A @ dx))
    return df + reg_value(problem.reg, x) - reg_value(problem.reg, problem.x_star)


def prox_residual(problem: ProblemInstance, x, alpha: float | None = None) -> float:
    """||x - prox(x, grad f(x), alpha)||, zero exactly at solutions."""
    if alpha is None:
        alpha = 1.0 / max(problem_L(problem.A), 1e-300)
    x = np.asarray(x, dtype=float)
    z = prox_step(problem.reg, problem.cons, x, problem.A @ x + problem.b, alpha)
    return float(np.linalg.norm(x - z))


def problem_L(A: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(A)[-1])


def _is_diagonal(A: np.ndarray) -> bool:
    return np.count_nonzero(A - np.diag(np.diag(A))) == 0


def _separable_closed_form(A, b, reg, cons):
    """Coordinate-wise minimizer for diagonal A and separable phi over a box or R^d."""
    a = np.diag(A)
    curv = a + 2.0 * reg.sq_weight
    w = reg.l1_weight
    soft = np.sign(-b) * np.maximum(np.abs(b) - w, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(curv > 0, soft / np.where(curv > 0, curv, 1.0),
                     np.where(soft == 0, 0.0, np.sign(soft) * np.inf))
    if cons.kind == "box":
        x = np.clip(x, cons.lo, cons.hi)
    if not np.all(np.isfinite(x)):
        raise ConvergenceError("objective is unbounded below along a zero-curvature coordinate")
    return x


def deterministic_fista(A, b, reg, cons, x0, alpha, T) -> list[np.ndarray]:
    """Exact-gradient FISTA with weights beta_t = (t + 1) / 2; returns z^1..z^T."""
    z_prev = np.asarray(x0, dtype=float)
    y = z_prev
    zs = []
    for t in range(1, T + 1):
        z = prox_step(reg, cons, y, A @ y + b, alpha)
        beta_t, beta_next = (t + 1) / 2.0, (t + 2) / 2.0
        y = ((beta_t - 1.0) / beta_next) * (z - z_prev) + z
        zs.append(z)
        z_prev = z
    return zs


def _restarted_fista(A, b, reg, cons, x0, alpha, max_iter, tol):
    """FISTA with gradient-based adaptive restart, run to a prox-residual target."""
    z_prev = np.asarray(x0, dtype=float)
    y = z_prev
    beta = 1.0
    res = math.inf
    for _ in range(max_iter):
        z = prox_step(reg, cons, y, A @ y + b, alpha)
        res = float(np.linalg.norm(z - prox_step(reg, cons, z, A @ z + b, alpha)))
        if res <= tol:
            return z, res
        if float((y - z) @ (z - z_prev)) > 0:
            beta = 1.0
        beta_next = (1.0 + math.sqrt(1.0 + 4.0 * beta * beta)) / 2.0
        y = ((beta - 1.0) / beta_next) * (z - z_prev) + z
        z_prev, beta = z, beta_next
    return z_prev, res


def reference_solution(A, b, reg: RegularizerSpec, cons: ConstraintSpec, tol: float = 1e-12,
                       max_iter: int = 200_000):
    """A minimizer of 0.5<x,Ax> + <b,x> + phi(x) over X and its value.

    Closed forms: linear solve for unconstrained zero / squared-l2
    regularizers, coordinate-wise soft-threshold for diagonal A with a
    separable regularizer (over R^d or a box).  Anything else falls back to
    exact-gradient FISTA with adaptive restart until the prox residual is at
    most ``tol``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    check_supported(reg, cons)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b.shape[0]
    if cons.kind == "all_space" and reg.kind in ("zero", "squared_l2"):
        H = A + 2.0 * reg.sq_weight * np.eye(d)
        if _is_diagonal(H):
            h = np.diag(H)
            if np.any((h <= EIG_TOL) & (np.abs(b) > 0)):
                raise ConvergenceError("objective is unbounded below: b has a component in ker(A)")
            x = np.where(h > EIG_TOL, -b / np.where(h > EIG_TOL, h, 1.0), 0.0)
        else:
            x = -np.linalg.pinv(H, hermitian=True) @ b
            if np.linalg.norm(H @ x + b) > 1e-8 * max(1.0, np.linalg.norm(b)):
                raise ConvergenceError("objective is unbounded below: b not in range(A)")
    elif _is_diagonal(A) and cons.kind in ("all_space", "box"):
        x = _separable_closed_form(A, b, reg, cons)
    else:
        L = max(problem_L(A), 1e-12)
        x0 = cons.project(np.zeros(d))
        x, res = _restarted_fista(A, b, reg, cons, x0, 1.0 / L, max_iter, tol)
        if res > tol:
            raise ConvergenceError(f"FISTA fallback stopped at residual {res:.3e} > tol={tol:.1e}")
    g = float(0.5 * x @ (A @ x) + b @ x) + reg_value(reg, x)
    return x, g


def make_quadratic(A, b, oracle: OracleModel | None = None, cons: ConstraintSpec | None = None,
                   reg: RegularizerSpec | None = None, tol: float = 1e-12,
                   spec: dict | None = None) -> ProblemInstance:
    oracle = oracle or OracleModel()
    cons = cons or ConstraintSpec()
    reg = reg or RegularizerSpec()
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    d = b.shape[0]
    if A.shape != (d, d):
        raise ValueError(f"A has shape {A.shape}, expected ({d}, {d})")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("A must be symmetric")
    eig = np.linalg.eigvalsh(A)
    if eig[0] < -EIG_TOL * max(1.0, eig[-1]):
        raise ValueError("A must be positive semidefinite")
    L = float(eig[-1])
    c = float(eig[0]) if eig[0] > EIG_TOL * max(1.0, L) else 0.0
    x_star, g_star = reference_solution(A, b, reg, cons, tol=tol)
    return ProblemInstance(
        A=A, b=b, reg=reg, cons=cons, oracle=oracle, L=L, c=c,
        x_star=x_star, g_star=g_star,
        sigma_star=oracle.pointwise_sigma(x_star), sigma_L=oracle.sigma_L(d),
        spec=dict(spec or {}),
    )


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def make_random_quadratic(d: int, spectrum: dict, noise: OracleModel | None = None,
                          cons: ConstraintSpec | None = None, reg: RegularizerSpec | None = None,
                          seed: int = 0, rotate: bool = False, target_scale: float = 1.0,
                          spacing: str = "random", target: str = "gaussian") -> ProblemInstance:
    """Quadratic with prescribed extreme eigenvalues.

    ``spectrum`` is either ``{"L": L, "c": c}`` (strongly convex when c > 0)
    or ``{"L": L, "rank_deficient": True, "null_dim": k, "floor": f}``.
    The interior eigenvalues are log-uniform between the smallest positive
    eigenvalue and L.  ``b = -A x_target`` for a random ``x_target`` of norm
    ``target_scale``, so the unconstrained unregularized minimizer is
    ``x_target`` (the min-norm one in the rank-deficient case).

    ``spacing="geometric"`` places the positive eigenvalues evenly in log
    scale instead of drawing them; ``target="flat"`` gives ``x_target`` equal
    magnitude (random signs) on every positive eigendirection.  Together they
    spread the initial error evenly over the log-spectrum.
    """
    if spacing not in ("random", "geometric") or target not in ("gaussian", "flat"):
        raise ValueError(f"unknown spacing/target {spacing!r}/{target!r}")
    if d < 1:
        raise ValueError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    L = float(spectrum.get("L", 1.0))
    if spectrum.get("rank_deficient", False):
        null_dim = int(spectrum.get("null_dim", 1))
        if not 1 <= null_dim <= d - 1:
            raise ValueError("rank-deficient spectrum needs 1 <= null_dim <= d - 1")
        lo = float(spectrum.get("floor", 1e-6 * L))
        if not 0 < lo <= L:
            raise ValueError("floor must lie in (0, L]")
        pos = _spectrum(d - null_dim, lo, L, rng, spacing)
        eig = np.concatenate([pos, np.zeros(null_dim)])
    else:
        c = float(spectrum.get("c", L))
        if not 0 <= c <= L or L <= 0:
            raise ValueError(f"infeasible spectrum: need 0 <= c <= L and L > 0, got c={c}, L={L}")
        if c == 0:
            raise ValueError("c = 0 requested; use rank_deficient=True for the non-strongly convex case")
        eig = _spectrum(d, c, L, rng, spacing)
    eig = np.sort(eig)[::-1]
    if target == "flat":
        x_target = rng.choice([-1.0, 1.0], d)
    else:
        x_target = rng.standard_normal(d)
    x_target = x_target * (eig > 0)
    x_target *= target_scale / np.linalg.norm(x_target)
    if rotate:
        Q = random_rotation(d, rng)
        A = (Q * eig) @ Q.T
        A = 0.5 * (A + A.T)
        x_target = Q @ x_target
    else:
        A = np.diag(eig)
    b = -A @ x_target
    spec = {"dim": d, "spectrum": dict(spectrum), "seed": seed, "rotate": rotate,
            "spacing": spacing, "target": target}
    problem = make_quadratic(A, b, noise, cons, reg, spec=spec)
    # reported constants follow the prescribed spectrum exactly
    c_exact = 0.0 if spectrum.get("rank_deficient", False) else float(eig[-1])
    return _replace_constants(problem, L=float(eig[0]), c=c_exact)


def _replace_constants(problem: ProblemInstance, **kw) -> ProblemInstance:
    fields = {k: getattr(problem, k) for k in problem.__dataclass_fields__}
    fields.update(kw)
    return ProblemInstance(**fields)


def _spectrum(n: int, lo: float, hi: float, rng: np.random.Generator, spacing: str) -> np.ndarray:
    if spacing == "geometric":
        if n == 1 and lo != hi:
            raise ValueError("infeasible spectrum: a single eigenvalue cannot have c != L")
        return np.geomspace(hi, lo, n)
    return _log_uniform_spectrum(n, lo, hi, rng)


def _log_uniform_spectrum(n: int, lo: float, hi: float, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        if lo != hi:
            raise ValueError("infeasible spectrum: a single eigenvalue cannot have c != L")
        return np.array([hi])
    if n == 2:
        return np.array([hi, lo])
    inner = np.exp(rng.uniform(math.log(lo), math.log(hi), n - 2))
    return np.concatenate([[hi], inner, [lo]])


def require_strongly_convex(problem: ProblemInstance) -> None:
    if not problem.c > 0:
        raise ValueError("this operation needs a strongly convex problem (c > 0)")

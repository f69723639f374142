"""Experiment setups used by the verification suites and the scripts."""

from __future__ import annotations

import math

from .config import ExperimentConfig


def smooth_multiplicative(T: int = 300, reps: int = 50, seed: int = 0, constraint: str = "box",
                          delta: float = 44.0, target_scale: float = 1.0) -> ExperimentConfig:
    """Rank-deficient d=20 quadratic, Gaussian random-matrix oracle with sigma_L = L."""
    d = 20
    flat = {
        "problem.dim": d, "problem.L": 1.0, "problem.rank_deficient": True,
        "problem.null_dim": 2, "problem.floor": 1e-6, "problem.seed": 11,
        "problem.target_scale": target_scale, "problem.constraint": constraint,
        "problem.spacing": "geometric", "problem.target": "flat",
        "oracle.kind": "random_matrix", "oracle.scale": 1.0 / math.sqrt(d),
        "policy.mu": 0.5, "policy.b": 0.5, "policy.delta": delta, "policy.N0": 2,
        "run.algorithm": "accelerated", "run.T": T, "run.reps": reps, "run.seed": seed,
        "run.name": f"smooth_{constraint}",
    }
    if constraint == "box":
        flat.update({"problem.box_lo": -10.0 * target_scale, "problem.box_hi": 10.0 * target_scale})
    return ExperimentConfig.from_mapping(flat)


def strong_linear_rate(T: int = 100, reps: int = 50, seed: int = 0) -> ExperimentConfig:
    """d=10, kappa=10 quadratic; matched sampling rate so that rho = zeta."""
    d = 10
    return ExperimentConfig.from_mapping({
        "problem.dim": d, "problem.L": 1.0, "problem.c": 0.1, "problem.seed": 5,
        "problem.rotate": True,
        "oracle.kind": "random_matrix", "oracle.scale": 0.2 / math.sqrt(d),
        "oracle.vector_scale": 0.3,
        "policy.mu": 0.5, "policy.N0": 4, "policy.phi_exo": 0.005, "policy.a_frac": 0.5,
        "run.algorithm": "prox_gradient", "run.T": T, "run.reps": reps, "run.seed": seed,
        "run.name": "strong_rate",
    })


def strong_complexity(T: int = 120, reps: int = 50, seed: int = 0) -> ExperimentConfig:
    """Well-conditioned quadratic with noise-dominated error, matched zeta ~ 0.835."""
    d = 10
    return ExperimentConfig.from_mapping({
        "problem.dim": d, "problem.L": 1.0, "problem.c": 0.5, "problem.seed": 7,
        "oracle.kind": "random_matrix", "oracle.scale": 0.5 / math.sqrt(d),
        "oracle.vector_scale": 1.0,
        "policy.mu": 0.9, "policy.N0": 1, "policy.phi_exo": 0.05, "policy.a_frac": 0.6,
        "run.algorithm": "prox_gradient", "run.T": T, "run.reps": reps, "run.seed": seed,
        "run.name": "strong_complexity",
    })


def smooth_complexity(T: int = 600, reps: int = 20, seed: int = 0) -> ExperimentConfig:
    """delta = 0 and a far start, so that the hitting times span a wide range."""
    cfg = smooth_multiplicative(T=T, reps=reps, seed=seed, constraint="all_space", delta=0.0,
                                target_scale=10.0)
    return cfg.with_overrides(**{"run.name": "smooth_complexity"})

"""Experiment configuration: flat ``key = value`` text files with dotted namespaces.

Example::

    # accelerated method on a rank-deficient quadratic
    problem.dim = 20
    problem.rank_deficient = true
    oracle.kind = random_matrix
    oracle.scale = 0.2236
    policy.delta = 44
    run.T = 300
    run.reps = 50
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from ..oracle import OracleModel
from ..problems import ProblemInstance, make_random_quadratic
from ..prox import ConstraintSpec, RegularizerSpec, check_supported
from ..schedules import SmoothPolicy, StrongPolicy, max_matched_fraction

ALGORITHMS = ("accelerated", "prox_gradient")


class ConfigError(ValueError):
    """Invalid experiment configuration (detected before any sampling)."""


@dataclass(frozen=True)
class ProblemConfig:
    dim: int = 10
    L: float = 1.0
    c: float = 0.1
    rank_deficient: bool = False
    null_dim: int = 1
    floor: Optional[float] = None
    rotate: bool = False
    seed: int = 0
    target_scale: float = 1.0
    spacing: str = "random"
    target: str = "gaussian"
    constraint: str = "all_space"
    box_lo: float = -math.inf
    box_hi: float = math.inf
    ball_radius: float = 1.0
    reg: str = "zero"
    reg_lam: float = 0.0
    reg_gamma: float = 0.0


@dataclass(frozen=True)
class OracleConfig:
    kind: str = "random_matrix"
    sigma: float = 0.0
    scale: float = 0.0
    vector_scale: Optional[float] = None
    sampling: str = "aggregate"


@dataclass(frozen=True)
class PolicyConfig:
    mu: float = 0.5
    a: Optional[float] = None
    b: float = 0.5
    delta: float = 44.0
    N0: int = 2
    beta_variant: str = "linear"
    phi: float = 0.5
    zeta: Optional[float] = None
    phi_exo: Optional[float] = None
    a_frac: Optional[float] = None


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "accelerated"
    T: int = 100
    reps: int = 10
    seed: int = 0
    budget: Optional[int] = None
    out: Optional[str] = None
    store_iterates: Optional[bool] = None
    name: str = "experiment"


_SECTIONS = {"problem": ProblemConfig, "oracle": OracleConfig, "policy": PolicyConfig,
             "run": RunConfig}


def parse_value(text: str) -> Any:
    s = text.strip()
    low = s.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if low in ("none", "null", ""):
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def parse_config_text(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(val)
    return out


def _coerce(name: str, typ, value):
    if value is None:
        return None
    base = str(typ).replace("Optional[", "").rstrip("]")
    try:
        if base == "bool":
            if isinstance(value, bool):
                return value
            raise TypeError
        if base == "int":
            if isinstance(value, bool) or float(value) != int(float(value)):
                raise TypeError
            return int(float(value))
        if base == "float":
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: cannot interpret {value!r} as {base}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemConfig = field(default_factory=ProblemConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @classmethod
    def from_mapping(cls, flat: dict[str, Any]) -> "ExperimentConfig":
        parts: dict[str, dict] = {k: {} for k in _SECTIONS}
        for key, value in flat.items():
            section, _, name = key.partition(".")
            if section not in _SECTIONS or not name:
                raise ConfigError(f"unknown key {key!r}; keys look like problem.dim, run.reps")
            fields = {f.name: f for f in dataclasses.fields(_SECTIONS[section])}
            if name not in fields:
                raise ConfigError(f"unknown key {key!r}; valid {section} keys: {sorted(fields)}")
            parts[section][name] = _coerce(key, fields[name].type, value)
        return cls(**{s: _SECTIONS[s](**kw) for s, kw in parts.items()})

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_text(text))

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))

    def to_flat(self) -> dict[str, Any]:
        out = {}
        for section in _SECTIONS:
            for k, v in dataclasses.asdict(getattr(self, section)).items():
                out[f"{section}.{k}"] = v
        return out

    def to_text(self) -> str:
        lines = []
        for k, v in self.to_flat().items():
            if v is None:
                continue
            lines.append(f"{k} = {str(v).lower() if isinstance(v, bool) else v}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **flat) -> "ExperimentConfig":
        merged = self.to_flat()
        merged.update({k: v for k, v in flat.items() if v is not None})
        return ExperimentConfig.from_mapping(merged)


# -- building the objects -------------------------------------------------------

def build_oracle(cfg: OracleConfig) -> OracleModel:
    return OracleModel(kind=cfg.kind, sigma=cfg.sigma, scale=cfg.scale,
                       vector_scale=cfg.vector_scale, sampling=cfg.sampling)


def build_constraint(cfg: ProblemConfig) -> ConstraintSpec:
    d = cfg.dim
    if cfg.constraint == "box":
        return ConstraintSpec.box(np.full(d, cfg.box_lo), np.full(d, cfg.box_hi))
    if cfg.constraint == "ball":
        return ConstraintSpec.ball(np.zeros(d), cfg.ball_radius)
    return ConstraintSpec(cfg.constraint)


def build_problem(cfg: ExperimentConfig) -> ProblemInstance:
    p = cfg.problem
    if p.rank_deficient:
        spectrum = {"L": p.L, "rank_deficient": True, "null_dim": p.null_dim}
        if p.floor is not None:
            spectrum["floor"] = p.floor
    else:
        spectrum = {"L": p.L, "c": p.c}
    reg = RegularizerSpec(p.reg, p.reg_lam, p.reg_gamma)
    return make_random_quadratic(p.dim, spectrum, build_oracle(cfg.oracle), build_constraint(p),
                                 reg, seed=p.seed, rotate=p.rotate, target_scale=p.target_scale,
                                 spacing=p.spacing, target=p.target)


def build_policy(cfg: ExperimentConfig, problem: ProblemInstance):
    q = cfg.policy
    if cfg.run.algorithm == "accelerated":
        return SmoothPolicy(L=problem.L, mu=q.mu, a=q.a, b=q.b, delta=q.delta, N0=q.N0,
                            beta_variant=q.beta_variant, phi=q.phi)
    L, c = problem.L, problem.c
    phi_exo = q.phi_exo if q.phi_exo is not None else q.mu * c / (4 * L)
    if q.zeta is not None:
        return StrongPolicy(L=L, c=c, mu=q.mu, zeta=q.zeta, N0=q.N0, phi_exo=phi_exo)
    a_frac = q.a_frac if q.a_frac is not None else 0.5 * max_matched_fraction(q.mu, c, L, phi_exo)
    return StrongPolicy.matched(L, c, q.mu, phi_exo, a_frac, N0=q.N0)


def validate(cfg: ExperimentConfig):
    """Build and check everything a run needs; returns ``(problem, policy)``."""
    r = cfg.run
    if r.algorithm not in ALGORITHMS:
        raise ConfigError(f"run.algorithm must be one of {ALGORITHMS}, got {r.algorithm!r}")
    if r.T < 1 or r.reps < 1:
        raise ConfigError("run.T and run.reps must be >= 1")
    if r.budget is not None and r.budget < 1:
        raise ConfigError("run.budget must be positive")
    try:
        reg = RegularizerSpec(cfg.problem.reg, cfg.problem.reg_lam, cfg.problem.reg_gamma)
        check_supported(reg, build_constraint(cfg.problem))
        problem = build_problem(cfg)
        if r.algorithm == "prox_gradient" and not problem.c > 0:
            raise ConfigError("prox_gradient needs a strongly convex problem (c > 0)")
        policy = build_policy(cfg, problem)
    except ConfigError:
        raise
    except (ValueError, RuntimeError) as exc:
        raise ConfigError(str(exc)) from exc
    return problem, policy

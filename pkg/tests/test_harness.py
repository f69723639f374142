import json
import math

import numpy as np
import pytest

from dynbatch.harness import (ConfigError, ExperimentConfig, complexity_curve, export,
                              run_experiment)
from dynbatch.harness.analysis import (ComplexityRow, complexity_slope, default_window,
                                       fit_geometric_rate, fit_power_rate)
from dynbatch.harness.config import parse_config_text, validate
from dynbatch.harness.export import CSV_COLUMNS, read_csv
from dynbatch.harness.runner import ExperimentError
from dynbatch.harness.verify import SUITES, verify
from dynbatch.schedules import smooth_batch

SMALL = """
problem.dim = 4
problem.L = 1.0
problem.c = 0.2
problem.seed = 3
oracle.kind = random_matrix
oracle.scale = 0.2
oracle.vector_scale = 0.3
policy.N0 = 1
policy.delta = 2
run.T = 15
run.reps = 4
run.seed = 5
run.name = small
"""


def small(**over):
    return ExperimentConfig.from_text(SMALL).with_overrides(**over)


# -- config --------------------------------------------------------------------

def test_parse_values_and_comments():
    flat = parse_config_text("a.x = 1  # int\n\n# comment\nb.y = 2.5\nc.z = true\nd.w = none\ne.v = abc")
    assert flat == {"a.x": 1, "b.y": 2.5, "c.z": True, "d.w": None, "e.v": "abc"}


@pytest.mark.parametrize("text", ["problem.dim 4", "problem.dim = 4\nproblem.dim = 5",
                                  "nosuch.key = 1", "problem.nosuch = 1", "problem.dim = 2.5",
                                  "problem.rotate = 1"])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text)


def test_config_text_round_trip():
    cfg = small()
    assert ExperimentConfig.from_text(cfg.to_text()) == cfg


@pytest.mark.parametrize("over", [{"run.algorithm": "sgd"}, {"run.T": 0},
                                  {"problem.constraint": "ball", "problem.reg": "l1"},
                                  {"run.algorithm": "prox_gradient", "problem.rank_deficient": True},
                                  {"policy.mu": 1.5}, {"run.budget": -1}])
def test_validation_rejects(over):
    with pytest.raises(ConfigError):
        validate(small(**over))


def test_strong_defaults_are_admissible():
    _, pol = validate(small(**{"run.algorithm": "prox_gradient"}))
    assert pol.rho == pytest.approx(pol.zeta)


# -- fits ----------------------------------------------------------------------

def test_power_fit_examples():
    t = np.arange(1, 101, dtype=float)
    slope, r2 = fit_power_rate(t, 100 / t**2, (1, 100))
    assert slope == pytest.approx(-2, abs=1e-9) and r2 > 0.999999
    assert fit_power_rate(t, 5 / t, (1, 100))[0] == pytest.approx(-1)
    noise = np.random.default_rng(0).standard_normal(100)
    assert -2.2 <= fit_power_rate(t, 3 * t**-2.0 * (1 + 0.05 * noise), (10, 100))[0] <= -1.8
    with pytest.raises(ValueError):
        fit_power_rate(t, -t, (1, 100))
    with pytest.raises(ValueError):
        fit_power_rate(t, t, (1, 4))


def test_geometric_fit_examples():
    t = np.arange(1, 81, dtype=float)
    assert fit_geometric_rate(t, 3 * 0.9**t, (1, 80))[0] == pytest.approx(0.9, abs=1e-9)
    assert fit_geometric_rate(t, np.full(80, 2.0), (1, 80))[0] == 1.0
    noise = np.random.default_rng(1).standard_normal(80)
    ratio, _ = fit_geometric_rate(t, 7 * 0.85**t * (1 + 0.05 * noise), (1, 80))
    assert abs(ratio - 0.85) <= 0.02


def test_default_window():
    assert default_window(300) == (31, 300)


class _View:
    def __init__(self, gap):
        self.t = np.arange(1, len(gap) + 1)
        self.gap_mean = np.asarray(gap)
        self.cum_calls = np.cumsum(np.arange(1, len(gap) + 1))


def test_complexity_curve_examples():
    v = _View(1.0 / np.arange(1, 201) ** 2)
    rows = complexity_curve(v, [10.0, 1e-4, 1e-2, 1e-6])
    assert rows[0].T_hit == 1
    assert rows[1].T_hit == 100 and rows[1].cum_calls == 5050
    assert rows[2].T_hit == 10
    assert not rows[3].reached and rows[3].cum_calls is None
    grid = sorted([1e-1, 1e-2, 1e-3, 1e-4], reverse=True)
    hits = [r.T_hit for r in complexity_curve(v, grid)]
    assert hits == sorted(hits)


def test_complexity_slope():
    rows = [ComplexityRow(10.0**-k, k, 10 ** (2 * k)) for k in range(1, 4)]
    assert complexity_slope(rows) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        complexity_slope(rows[:1] + [ComplexityRow(1e-9, None, None)])


# -- runs ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def res():
    return run_experiment(small(**{"run.store_iterates": True}), keep_trajectories=True)


def test_aggregates_match_trajectories(res):
    gaps = np.array([tr.gap for tr in res.trajectories])
    assert np.allclose(res.gap_mean, gaps.mean(axis=0), rtol=0, atol=1e-12)
    assert res.rep_count == 4 and res.failures == 0


def test_complexity_curve_matches_schedule(res):
    for row in complexity_curve(res, [res.gap_mean[3], res.gap_mean[-1]]):
        assert row.cum_calls == sum(smooth_batch(t, 1, 0.5, 2.0) for t in range(1, row.T_hit + 1))


def test_single_rep_has_zero_se():
    r = run_experiment(small(**{"run.reps": 1}))
    assert np.all(r.gap_se == 0) and np.all(r.dist_sq_se == 0)


def test_zero_noise_has_zero_se():
    r = run_experiment(small(**{"oracle.scale": 0.0, "oracle.vector_scale": 0.0}))
    assert np.all(r.gap_se == 0)


def test_prefix_replications_stable():
    a = run_experiment(small(**{"run.reps": 2}), keep_trajectories=True)
    b = run_experiment(small(**{"run.reps": 4}), keep_trajectories=True)
    for x, y in zip(a.trajectories, b.trajectories[:2]):
        assert np.array_equal(x.gap, y.gap)


def test_parallel_matches_serial(res, tmp_path):
    cfg = small(**{"run.store_iterates": True})
    par = run_experiment(cfg, jobs=2)
    export(res, ["csv"], tmp_path / "a")
    export(par, ["csv"], tmp_path / "b")
    assert (tmp_path / "a/small.csv").read_bytes() == (tmp_path / "b/small.csv").read_bytes()


def test_prox_gradient_audit():
    short = run_experiment(small(**{"run.algorithm": "prox_gradient", "run.T": 30}))
    assert short.bound.t0 > 31 and short.bound.C is None
    assert np.all(np.isnan(short.bound_curve))
    r = run_experiment(small(**{"run.algorithm": "prox_gradient", "run.T": 200}))
    assert r.bound.rho is not None and r.bound.C > 0
    assert np.all(r.beta_t == 1.0)
    assert np.all(r.dist_sq_mean <= r.bound_curve)


def test_budget_too_small_is_an_error():
    with pytest.raises(ExperimentError):
        run_experiment(small(**{"run.budget": 1}))


# -- export --------------------------------------------------------------------

def test_csv_round_trip(res, tmp_path):
    paths = export(res, ["csv", "json"], tmp_path)
    cols = read_csv(paths[0])
    assert paths[0].read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    for name, attr in (("gap_mean", "gap_mean"), ("dist_sq_se", "dist_sq_se"), ("dM_mean", "dM_mean"),
                       ("alpha_t", "alpha_t"), ("N_t", "N_t"), ("cum_calls", "cum_calls")):
        assert np.array_equal(cols[name], getattr(res, attr))
    summary = json.loads(paths[1].read_text())
    # infinite box bounds travel as strings and parse back
    assert summary["config_echo"]["problem.box_hi"] == "inf"
    assert ExperimentConfig.from_mapping(summary["config_echo"]) == res.config
    assert summary["seed"] == 5 and "version" in summary and "bound_report" in summary


def test_export_env_default(res, tmp_path, monkeypatch):
    monkeypatch.setenv("DYNBATCH_OUT_DIR", str(tmp_path / "env"))
    (p,) = export(res, ["json"])
    assert p.parent == tmp_path / "env"


def test_export_errors(res, tmp_path):
    with pytest.raises(ValueError):
        export(res, ["xml"], tmp_path)
    with pytest.raises(ValueError):
        export(None, ["csv"], tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        export(res, ["csv"], blocker / "sub")


def test_run_twice_byte_identical(tmp_path):
    cfg = small()
    export(run_experiment(cfg), ["csv"], tmp_path / "1")
    export(run_experiment(cfg), ["csv"], tmp_path / "2")
    assert (tmp_path / "1/small.csv").read_bytes() == (tmp_path / "2/small.csv").read_bytes()


# -- verify --------------------------------------------------------------------

def test_verify_unknown_suite():
    with pytest.raises(ValueError, match="prox"):
        verify("nope")
    assert set(SUITES) == {"prox", "oracle", "schedules", "theorem1", "theorem2", "complexity"}


def test_verify_theorem2_suite_passes():
    rep = verify("theorem2")
    assert rep.passed, rep.lines()
    assert all(line.startswith("PASS") for line in rep.lines())

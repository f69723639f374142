import json
import subprocess
import sys
from pathlib import Path

import pytest

from dynbatch.harness import ExperimentConfig, presets
from dynbatch.harness.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

TINY = """
problem.dim = 3
problem.c = 0.3
oracle.scale = 0.1
policy.N0 = 1
run.T = 12
run.reps = 3
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "tiny.cfg"
    p.write_text(TINY)
    return p


def test_run_writes_outputs(cfg_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(cfg_file), "--out", str(out), "--jobs", "1"]) == 0
    assert (out / "tiny.csv").exists()
    summary = json.loads((out / "tiny.json").read_text())
    assert summary["rep_count"] == 3
    assert "wrote" in capsys.readouterr().out


def test_overrides(cfg_file, tmp_path):
    out = tmp_path / "out"
    assert main(["run", str(cfg_file), "--out", str(out), "--reps", "2", "--seed", "9",
                 "--jobs", "1"]) == 0
    summary = json.loads((out / "tiny.json").read_text())
    assert summary["rep_count"] == 2 and summary["seed"] == 9


def test_env_out_dir(cfg_file, tmp_path, monkeypatch):
    monkeypatch.setenv("DYNBATCH_OUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(cfg_file), "--jobs", "1"]) == 0
    assert (tmp_path / "env" / "tiny.csv").exists()


def test_sweep_and_report(cfg_file, tmp_path, capsys):
    (cfg_file.parent / "second.cfg").write_text(TINY + "run.algorithm = prox_gradient\n")
    out = tmp_path / "out"
    assert main(["sweep", str(cfg_file.parent), "--out", str(out), "--jobs", "1"]) == 0
    assert sorted(p.name for p in out.glob("*.csv")) == ["second.csv", "tiny.csv"]
    capsys.readouterr()
    assert main(["report", str(out), "--eps", "1,1e-3"]) == 0
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert {d["algo"] for d in lines} == {"accelerated", "prox_gradient"}
    assert all(len(d["complexity"]) == 2 for d in lines)


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("policy.mu = 2\n")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2
    bad.write_text("not a config line\n")
    assert main(["run", str(bad), "--out", str(tmp_path)]) == 2


def test_io_error_exit_codes(cfg_file, tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 4
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert main(["run", str(cfg_file), "--out", str(blocker / "x"), "--jobs", "1"]) == 4
    assert main(["report", str(tmp_path / "empty")]) == 4


def test_verify_exit_codes(capsys):
    assert main(["verify", "theorem2"]) == 0
    assert "suite theorem2: PASS" in capsys.readouterr().out
    assert main(["verify", "bogus"]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "dynbatch", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.startswith("dynbatch ")


@pytest.mark.parametrize("name,preset", [("smooth_box", presets.smooth_multiplicative()),
                                         ("smooth_free", presets.smooth_multiplicative(constraint="all_space")),
                                         ("strong_rate", presets.strong_linear_rate()),
                                         ("strong_complexity", presets.strong_complexity()),
                                         ("smooth_complexity", presets.smooth_complexity())])
def test_shipped_configs_match_presets(name, preset):
    assert ExperimentConfig.from_file(CONFIGS / f"{name}.cfg") == preset.with_overrides(
        **{"run.name": name})

import json
import subprocess
import sys

import pytest

from qphase import cli
from qphase.errors import NumericalError


def test_shortcut_writes_csv_to_stdout(capsys):
    assert cli.main(["qec-steane", "--sigma", "0.05", "--trials", "3", "--seed", "7"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "trial,sigma,syndrome,fidelity,residual,expected_residual,components"
    assert len(out) == 4


def test_run_config_with_out(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "grover", "n_qubits": 3, "seed": 1}))
    out = tmp_path / "run"
    assert cli.main(["run", "--config", str(cfg), "--out", str(out), "--dump-final"]) == 0
    assert (out / "trials.csv").exists() and (out / "state.dump").exists()
    assert json.loads((out / "summary.json").read_text())["config"]["n_qubits"] == 3


def test_seed_and_set_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "phase-walk", "walk": {"s": 0.1, "m": 4}, "trials": 3}))
    cli.main(["run", "--config", str(cfg), "--seed", "5", "--set", "walk.m=9"])
    a = capsys.readouterr().out
    cli.main(["phase-walk", "--walk.s", "0.1", "--walk.m", "9", "--trials", "3", "--seed", "5"])
    assert capsys.readouterr().out == a


def test_dashed_aliases(capsys):
    assert cli.main(["grover", "--n-qubits", "2", "--iterations", "1"]) == 0
    assert capsys.readouterr().out.splitlines()[-1].endswith(",1.0")


@pytest.mark.parametrize("argv", [
    ["stats", "--stats.N", "2", "--stats.n", "3", "--stats.family", "fermi_dirac"],
    ["qec-shor"],
    ["grover", "--n_qubits", "three"],
    ["run", "--config", "/nonexistent/cfg.json"],
    ["qec-steane", "--sigma", "0.1", "--seed", "-1"],
])
def test_config_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2
    assert "config error" in capsys.readouterr().err


def test_numerical_error_exit_3(monkeypatch, capsys):
    def boom(*a, **k):
        raise NumericalError("norm drift")
    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(["grover", "--n_qubits", "2"]) == 3
    assert "norm drift" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "qphase", "decoherence", "--decoherence.t_d", "1", "--t", "0.5,1"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(proc.stdout.splitlines()) == 3

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from corrsense.cli import main
from corrsense.dynamics import QubitRegisterState, save_state_txt
from corrsense.pulse_filter import PulseSequence, SpectralModel, coefficient_closed_form, optimize_shot_time


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def manifest(tmp_path):
    return json.loads((tmp_path / "manifest.json").read_text())


def test_matrix_example(tmp_path):
    assert run(tmp_path, "matrix", "--n", "3", "--alpha", "1", "--xi", "1") == 0
    rows = list(csv.reader(open(tmp_path / "matrix.csv")))
    assert rows[0] == ["c0", "c1", "c2"]
    np.testing.assert_array_equal(np.array(rows[1:], dtype=float), [[2, 1, 0.5], [1, 2, 1], [0.5, 1, 2]])
    eig = json.loads((tmp_path / "eigenvalues.json").read_text())
    assert eig["psd"] is True and eig["min_eigenvalue"] > 0
    m = manifest(tmp_path)
    assert m["command"] == "matrix" and m["exit_code"] == 0
    assert m["parameters"]["alpha"] == 1.0 and m["argv"][:3] == ["matrix", "--n", "3"]
    assert len(m["outputs"]) == 2


def test_argument_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "matrix", "--alpha", "1")
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "matrix", "--n", "3", "--alpha", "0")
    assert exc.value.code == 2


def test_psd_violation_exit(tmp_path):
    assert run(tmp_path, "matrix", "--n", "8", "--alpha", "0.1", "--diag-scale", "0.1") == 3
    assert manifest(tmp_path)["exit_code"] == 3


def test_qfi_short_time_examples(tmp_path):
    assert run(tmp_path, "qfi", "--state", "ghz", "--n", "3", "--alpha", "1", "--xi", "1", "--gamma", "1") == 0
    doc = json.loads((tmp_path / "qfi.json").read_text())
    assert doc["f_q"] == pytest.approx(1.375, rel=1e-11) and doc["method"] == "ShortTimeRate"
    assert run(tmp_path, "qfi", "--state", "plus-product", "--n", "3", "--alpha", "1") == 0
    assert json.loads((tmp_path / "qfi.json").read_text())["f_q"] == pytest.approx(0.75, rel=1e-11)


def test_qfi_colored_round_trip(tmp_path):
    argv = ["qfi", "--state", "ghz", "--n", "4", "--alpha", "0.5", "--xi", "1", "--gamma", "1",
            "--p", "1", "--pulses", "0.5"]
    assert run(tmp_path, *argv) == 0
    doc = json.loads((tmp_path / "qfi.json").read_text())
    A_sum = 4 * 2 + 2 * (3 + 2 * 2 ** -0.5 + 3 ** -0.5)
    seq = PulseSequence.hahn()
    C = coefficient_closed_form(seq, 1.0).value
    y0, t_opt, rate = optimize_shot_time(SpectralModel(1.0, 1.0, 0.0), seq, C * A_sum)
    assert doc["y0"] == pytest.approx(y0, rel=1e-11)
    assert doc["t_opt"] == pytest.approx(t_opt, rel=1e-11)
    assert doc["rate"] == pytest.approx(rate, rel=1e-11)
    assert doc["rate_at_t_opt_sld"] == pytest.approx(rate, rel=1e-8)


def test_qfi_from_state_file(tmp_path):
    save_state_txt(tmp_path / "ghz.txt", QubitRegisterState.ghz(3))
    assert run(tmp_path, "qfi", "--state", f"file:{tmp_path / 'ghz.txt'}", "--n", "3", "--alpha", "1") == 0
    assert json.loads((tmp_path / "qfi.json").read_text())["f_q"] == pytest.approx(1.375, rel=1e-11)
    assert run(tmp_path, "qfi", "--state", f"file:{tmp_path / 'ghz.txt'}", "--n", "2", "--alpha", "1") == 2
    assert run(tmp_path, "qfi", "--state", "w-state", "--n", "2", "--alpha", "1") == 2


def test_qfi_finite_time(tmp_path):
    assert run(tmp_path, "qfi", "--state", "ghz", "--n", "2", "--alpha", "1", "--time", "0.01") == 0
    doc = json.loads((tmp_path / "qfi.json").read_text())
    assert doc["method"] == "SLD" and doc["F_Q"] / 0.01 == pytest.approx(0.75, rel=0.02)
    assert run(tmp_path, "qfi", "--state", "ghz", "--n", "2", "--alpha", "1", "--time", "-1") == 2


def test_regime_error_exit(tmp_path):
    assert run(tmp_path, "qfi", "--state", "ghz", "--n", "2", "--alpha", "1", "--p", "3.5") == 4
    assert run(tmp_path, "sweep", "--alpha", "0.5", "--p", "1.5", "--pulses", "", "--n-max", "256") == 4


def test_sweep_examples(tmp_path):
    assert run(tmp_path, "sweep", "--alpha", "0.5", "--p", "0") == 0
    fit = json.loads((tmp_path / "fit.json").read_text())
    assert fit["pass"] is True and fit["exponent"] == pytest.approx(0.5, abs=0.05)
    rows = list(csv.reader(open(tmp_path / "sweep.csv")))
    assert rows[0] == ["N", "R", "t_opt", "A_N"] and len(rows) == 10
    assert run(tmp_path, "sweep", "--alpha", "2", "--p", "0") == 0
    assert json.loads((tmp_path / "fit.json").read_text())["theoretical"] == "BOUNDED"


def test_sweep_degenerate_grid(tmp_path):
    assert run(tmp_path, "sweep", "--alpha", "0.5", "--n-min", "64", "--n-max", "64") == 2
    assert run(tmp_path, "sweep", "--alpha", "0.5", "--points", "3") == 2


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify", "--suite", "mc-white", "--seed", "7", "--out", str(a)]) == 0
    assert main(["verify", "--suite", "mc-white", "--seed", "7", "--out", str(b), "--threads", "2"]) == 0
    text = (a / "verify-mc-white.txt").read_text()
    assert text == (b / "verify-mc-white.txt").read_text()
    assert "FAIL" not in text


def test_verify_filter_suite(tmp_path):
    assert run(tmp_path, "verify", "--suite", "filter", "--seed", "7") == 0
    assert "golden" in (tmp_path / "verify-filter.txt").read_text()


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("CORRSENSE_OUT", str(tmp_path / "env"))
    assert main(["matrix", "--n", "2", "--alpha", "1"]) == 0
    assert (tmp_path / "env" / "matrix.csv").exists()


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "corrsense", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("corrsense ")

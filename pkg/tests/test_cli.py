import json
import subprocess
import sys

import numpy as np
import pytest

from freetails.cli import main, parse_measure
from freetails.exceptions import ValidationError


def run(tmp_path, *args):
    code = main(list(args) + ["--out-dir", str(tmp_path)])
    return code


def manifest(tmp_path, name):
    return json.loads((tmp_path / f"manifest-{name}.json").read_text())


@pytest.mark.parametrize("text", ["pareto:1.5", "pareto:2.5:2", "atom:1", "atom:2:0.5", "mp", "semicircle", "uniform:0:2"])
def test_parse_measure(text):
    m = parse_measure(text)
    assert np.imag(m.cauchy(np.array([1 + 1j]))[0]) < 0


@pytest.mark.parametrize("text", ["pareto", "foo:1", "atom:x", "uniform:1"])
def test_parse_measure_rejects(text):
    with pytest.raises(ValidationError):
        parse_measure(text)


def test_transform_is_byte_identical(tmp_path):
    assert run(tmp_path, "transform", "--measure", "pareto:2.5", "--points", "8", "--p", "2", "--out", "a.csv") == 0
    assert run(tmp_path, "transform", "--measure", "pareto:2.5", "--points", "8", "--p", "2", "--out", "b.csv") == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert manifest(tmp_path, "transform")["results"]["signs_ok"] is True


def test_convolve_add(tmp_path):
    assert run(tmp_path, "convolve", "--op", "add", "--lhs", "atom:1", "--rhs", "atom:2", "--points", "5") == 0
    rows = np.loadtxt(tmp_path / "convolve.csv", delimiter=",", skiprows=1)
    z = rows[:, 0] + 1j * rows[:, 1]
    g = rows[:, 2] + 1j * rows[:, 3]
    assert np.allclose(g, 1 / (z - 3))


def test_levy_build_and_invert(tmp_path):
    assert run(tmp_path, "levy-build", "--nu", "atom:1", "--out", "t.json") == 0
    assert run(tmp_path, "invert", "--triplet", str(tmp_path / "t.json"), "--body-max", "6", "--tail-max", "6") == 0
    res = manifest(tmp_path, "invert")["results"]
    assert res["mass"] == pytest.approx(1.0, abs=2e-3)


def test_invert_stable(tmp_path):
    assert run(tmp_path, "invert", "--phi", "stable:0.5:1", "--tail-max", "1e3") == 0
    assert manifest(tmp_path, "invert")["results"]["fitted_alpha"] == pytest.approx(0.5, abs=0.02)


def test_remainder_check(tmp_path):
    assert run(tmp_path, "remainder-check", "--measure", "pareto:1.5", "--p", "1", "--out", "r.json") == 0
    res = manifest(tmp_path, "remainder-check")["results"]
    assert res["truncated_at_y_max"]["re"] == pytest.approx(res["stated"]["re"], rel=0.01)


def test_rmt_sim(tmp_path):
    assert run(tmp_path, "rmt-sim", "--rho", "atom:1", "--n", "100", "--m", "100", "--trials", "3", "--seed", "4") == 0
    m = manifest(tmp_path, "rmt-sim")
    assert m["seed"] == 4
    assert m["results"]["ks_vs_mp"] < 0.05


def test_validation_error_exit_code(tmp_path, capsys):
    assert run(tmp_path, "transform", "--measure", "nope") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ValidationError" and err["exit_code"] == 2


def test_numerical_error_exit_code(tmp_path, capsys):
    # inverting a law whose mass sits beyond the grid triggers MassDeficit
    code = run(tmp_path, "invert", "--measure", "atom:50", "--body-max", "5", "--tail-max", "5")
    assert code == 3
    assert json.loads(capsys.readouterr().err)["exit_code"] == 3


def test_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("FREETAILS_OUT", str(tmp_path))
    assert main(["levy-build", "--sigma", "pareto:2.5"]) == 0
    assert (tmp_path / "triplet.json").exists()


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "freetails.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()

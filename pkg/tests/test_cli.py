import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pileup.cli import main

MODEL = {
    "h": {"coeff": 1, "exp_n": 0, "exp_log": 0},
    "K": {"coeff": 1, "exp_n": 0, "exp_log": 0},
    "sigma": {"coeff": 1, "exp_n": -1, "exp_log": 0},
    "L": {"coeff": 1, "exp_n": 0, "exp_log": 0},
}


@pytest.fixture
def model(tmp_path):
    p = tmp_path / "model.json"
    p.write_text(json.dumps(MODEL))
    return p


def test_classify(model, capsys):
    assert main(["classify", "--config", str(model)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert (out["p"], out["q"]) == (2, 3)
    for key in ("c_tilde", "Lambda", "beta", "C", "ahat_form", "ell_form", "alpha_form", "Lambda_form"):
        assert key in out


def test_global_flags_before_subcommand(model, capsys):
    assert main(["--config", str(model), "--threads", "4", "--seed", "7", "classify"]) == 0


def test_unclassifiable_exit_code(tmp_path):
    bad = dict(MODEL, h={"coeff": 1, "exp_n": -1, "exp_log": 0}, K={"coeff": 1 / math.pi, "exp_n": 0, "exp_log": 1}, L=None)
    bad["sigma"] = {"coeff": 1, "exp_n": 0, "exp_log": 0}
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    assert main(["classify", "--config", str(p)]) == 3


def test_config_error_exit_code(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["classify", "--config", str(p)]) == 1
    assert main(["classify", "--config", str(tmp_path / "missing.json")]) == 1
    assert main(["converge-study", "--config", str(p)]) == 1


def test_potential_table(tmp_path):
    out = tmp_path / "v.csv"
    assert main(["potential-table", "--rmin", "0.5", "--rmax", "2", "--steps", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("#")
    header = [l for l in lines if not l.startswith("#")][0]
    assert header == "r,V,dV"
    row = [l for l in lines if l[0].isdigit()][0].split(",")
    assert float(row[0]) == 0.5 and len(row[1].replace("-", "").replace(".", "")) >= 15


def test_minimize_and_energy(model, tmp_path, capsys):
    out = tmp_path / "min.csv"
    assert main(["minimize", "--config", str(model), "--n", "32", "--out", str(out)]) == 0
    side = json.loads(out.with_suffix(".json").read_text())
    for key in ("objective", "iterations", "kkt_residual"):
        assert key in side
    capsys.readouterr()
    assert main(["energy", "--config", str(model), "--positions", str(out)]) == 0
    parts = json.loads(capsys.readouterr().out)
    assert parts["total"] == pytest.approx(side["objective"], rel=1e-15)


def test_minimize_nonconvergence_exit_code(model, tmp_path, monkeypatch):
    import pileup.cli as cli
    from pileup import optimizer

    orig = optimizer.minimize_discrete
    monkeypatch.setattr(cli, "minimize_discrete", lambda ctx, n: orig(ctx, n, max_iter=1))
    assert main(["minimize", "--config", str(model), "--n", "32", "--out", str(tmp_path / "m.csv")]) == 2


def test_limit_minimize(tmp_path, capsys):
    c = tmp_path / "c.json"
    c.write_text(json.dumps({"C": 2 * math.pi**2 / 3}))
    out = tmp_path / "rho.csv"
    assert main(["limit-minimize", "--p", "3", "--q", "2", "--constants", str(c), "--m", "200", "--out", str(out)]) == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["objective"] == pytest.approx(4 * math.pi**2 / 9, abs=2e-3)
    assert summary["m"] == 200 and summary["regime"] == [3, 2]
    data = np.loadtxt(out, delimiter=",", comments="#", skiprows=4)
    assert data.shape[1] == 2
    inner = data[:, 0] < 0.9
    assert np.max(np.abs(data[inner, 1] - 2 * (1 - data[inner, 0]))) < 0.05


def test_limit_minimize_bad_regime():
    assert main(["limit-minimize", "--p", "7", "--q", "2"]) == 1


def test_converge_study(model, tmp_path):
    rc = main(["--out", str(tmp_path), "converge-study", "--config", str(model), "--n-list", "8,16,32", "--m-continuum", "100"])
    assert rc == 0
    assert (tmp_path / "convergence_study.csv").exists()
    summary = json.loads((tmp_path / "convergence_summary.json").read_text())
    assert summary["thresholds"] == {"band": 1.1, "window": 3}


def test_converge_study_empty_list(model, tmp_path):
    cfg = tmp_path / "study.json"
    cfg.write_text(json.dumps({"params": MODEL, "n_list": []}))
    assert main(["converge-study", "--config", str(cfg)]) == 1


def test_module_entry_point(model):
    r = subprocess.run([sys.executable, "-m", "pileup", "classify", "--config", str(model)], capture_output=True, text=True)
    assert r.returncode == 0 and '"p": 2' in r.stdout

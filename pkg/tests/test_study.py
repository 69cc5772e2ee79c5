import math

import numpy as np
import pytest

from pileup.exceptions import ConfigError
from pileup.scaling import INV_N, ONE, ParamSequences, PowerLawSeq
from pileup.study import (
    StudyConfig,
    non_increasing_within,
    read_study_csv,
    run_convergence_study,
    run_log_study,
)

# alpha_n = pi (p = 4), Lambda_n -> pi / ahat < 1 ... -> regime (2, 3) with h = sigma = 1/n
SMALL = ParamSequences(h=ONE, K=ONE, sigma=INV_N, L=ONE)


def log_family(b=2.0):
    """alpha_n = log n exactly, Lambda_n -> 1/b: regime (5, 2) with beta = 0."""
    return ParamSequences(h=PowerLawSeq(math.pi, -1, -1), K=PowerLawSeq(1.0, 2 * b, -1), sigma=ONE, L=ONE)


def test_config_validation():
    with pytest.raises(ConfigError):
        StudyConfig(SMALL, [])
    with pytest.raises(ConfigError):
        StudyConfig(SMALL, [32, 16])
    with pytest.raises(ConfigError):
        StudyConfig(SMALL, [16], m_continuum=50)
    with pytest.raises(ConfigError):
        StudyConfig.from_dict({"n_list": [16]})


def test_config_round_trip():
    cfg = StudyConfig(SMALL, [8, 16], m_continuum=200, M=3.0)
    back = StudyConfig.from_dict(cfg.to_dict())
    assert back.to_dict() == cfg.to_dict()


def test_verdict_rule():
    assert non_increasing_within([5.0, 1.0, 1.05, 1.1])
    assert not non_increasing_within([5.0, 1.0, 1.2, 1.0])
    assert not non_increasing_within([1.0])
    assert not non_increasing_within([1.0, math.nan, 0.5])


def test_convergence_study_small(tmp_path):
    cfg = StudyConfig(SMALL, [16, 32, 64], m_continuum=200, output_dir=tmp_path)
    res = run_convergence_study(cfg)
    assert [r["n"] for r in res.records] == [16, 32, 64]
    assert all(math.isfinite(r["objective"]) and r["converged"] for r in res.records)
    assert res.verdict == "consistent"
    gaps = [r["gap"] for r in res.records]
    assert gaps[0] > gaps[1] > gaps[2]
    assert (tmp_path / "convergence_study.csv").exists()
    assert (tmp_path / "convergence_summary.json").exists()


def test_study_output_deterministic(tmp_path):
    outputs = []
    for _ in range(2):
        run_convergence_study(StudyConfig(SMALL, [8, 16], m_continuum=100, output_dir=tmp_path))
        outputs.append([(tmp_path / f).read_bytes() for f in ("convergence_study.csv", "convergence_summary.json")])
    assert outputs[0] == outputs[1]


def test_study_csv_round_trip(tmp_path):
    run_convergence_study(StudyConfig(SMALL, [8, 16], m_continuum=100, output_dir=tmp_path))
    path = tmp_path / "convergence_study.csv"
    meta, cols, rows = read_study_csv(path)
    assert cols[0] == "n" and len(rows) == 2
    lines = [f"# {k}={v}" for k, v in meta.items()] + [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(int(v)) if c in ("n", "iterations", "converged") else "%.17g" % v for c, v in zip(cols, row)))
    assert "\n".join(lines) + "\n" == path.read_text()


def test_log_study_approaches_half():
    cfg = StudyConfig(log_family(), [64, 128, 256], m_continuum=100, M=2.0)
    res = run_log_study(cfg)
    errs = [r["error_to_limit"] for r in res.records]
    assert errs[0] > errs[1] > errs[2]
    assert all(r["error_to_limit"] <= r["error_bound"] for r in res.records)
    assert res.continuum_objective == 0.5


def test_log_study_uniform_case():
    res = run_log_study(StudyConfig(log_family(), [64, 256, 1024], m_continuum=100, M=1.0))
    vals = [abs(r["log_energy"]) for r in res.records]
    assert vals[0] > vals[1] > vals[2]
    assert res.continuum_objective == 0.0


def test_log_study_rejects_other_regimes():
    with pytest.raises(ConfigError):
        run_log_study(StudyConfig(SMALL, [16], m_continuum=100))

"""Discrete-to-continuum convergence studies.

A study solves the discrete problem for a list of wall numbers ``n``,
solves the matching limit problem once, and records how the energy gap and
the 1-Wasserstein distance between minimisers evolve with ``n``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import continuum
from .continuum import LimitConstants
from .discrete_energy import context_at, log_rescaled_energy
from .exceptions import ConfigError, SingularConfiguration
from .measures import EmpiricalMeasure, QuantileFn, midpoints, w1_distance
from .optimizer import KKT_RTOL, MAX_ITER, minimize_discrete
from .scaling import ParamSequences, RegimeReport, classify

__all__ = [
    "StudyConfig",
    "StudyResult",
    "run_convergence_study",
    "run_log_study",
    "non_increasing_within",
    "VERDICT_BAND",
    "VERDICT_WINDOW",
]

#: A gap sequence is "non-increasing" if each term is at most this factor
#: times its predecessor ...
VERDICT_BAND = 1.10
#: ... over this many trailing values of n.
VERDICT_WINDOW = 3


@dataclass
class StudyConfig:
    params: ParamSequences
    n_list: list
    m_continuum: int = 400
    kkt_rtol: float = KKT_RTOL
    max_iter: int = MAX_ITER
    output_dir: Optional[Path] = None
    M: float = 2.0

    def __post_init__(self):
        self.n_list = [int(n) for n in self.n_list]
        if not self.n_list:
            raise ConfigError("n_list must not be empty")
        if any(n < 1 for n in self.n_list) or any(b <= a for a, b in zip(self.n_list, self.n_list[1:])):
            raise ConfigError("n_list must hold positive, strictly increasing integers")
        if int(self.m_continuum) < 100:
            raise ConfigError("m_continuum must be at least 100")
        self.m_continuum = int(self.m_continuum)
        if not self.M >= 1.0:
            raise ConfigError("M must be at least 1")
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)

    @classmethod
    def from_dict(cls, d):
        try:
            params = ParamSequences.from_dict(d["params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad or missing 'params': {exc}") from exc
        tol = d.get("tolerances", {}) or {}
        return cls(
            params=params,
            n_list=d.get("n_list", []),
            m_continuum=d.get("m_continuum", 400),
            kkt_rtol=float(tol.get("kkt_rtol", KKT_RTOL)),
            max_iter=int(tol.get("max_iter", MAX_ITER)),
            output_dir=d.get("output_dir"),
            M=float(d.get("M", 2.0)),
        )

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "n_list": list(self.n_list),
            "m_continuum": self.m_continuum,
            "tolerances": {"kkt_rtol": self.kkt_rtol, "max_iter": self.max_iter},
            "output_dir": None if self.output_dir is None else str(self.output_dir),
            "M": self.M,
        }


@dataclass
class StudyResult:
    regime: RegimeReport
    records: list
    continuum_objective: float
    verdict: str
    verdict_detail: dict = field(default_factory=dict)
    kind: str = "convergence"

    def to_dict(self):
        return {
            "kind": self.kind,
            "regime": self.regime.to_dict(),
            "continuum_objective": _num(self.continuum_objective),
            "verdict": self.verdict,
            "verdict_detail": self.verdict_detail,
            "thresholds": {"band": VERDICT_BAND, "window": VERDICT_WINDOW},
            "records": [{k: _num(v) for k, v in r.items()} for r in self.records],
        }


def _num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def non_increasing_within(values, band=VERDICT_BAND, window=VERDICT_WINDOW):
    """True if the last ``window`` values never grow by more than ``band``."""
    tail = [float(v) for v in values][-window:]
    if len(tail) < 2 or not all(math.isfinite(v) for v in tail):
        return False
    return all(b <= band * a for a, b in zip(tail, tail[1:]))


def _limit_problem(report: RegimeReport, m: int):
    """Continuum minimiser (as a quantile) and minimum for a regime."""
    if report.particular_case:
        # min of int(xi) under xi' >= 1 and sup xi <= Lambda (Lambda >= 1)
        xi = continuum.uniform_quantile(m)
        return xi, continuum.particular_case_energy(report.Lambda, xi)
    const = LimitConstants.from_report(report)
    rep = continuum.minimize_limit(report.p, report.q, const, m)
    return QuantileFn(rep.minimizer), rep.objective


def _solve_sequence(cfg: StudyConfig, report, upper=None):
    prev = None
    for n in cfg.n_list:
        ctx = context_at(cfg.params, n, report)
        rec = {"n": n}
        try:
            sol = minimize_discrete(
                ctx, n, init=prev, upper=upper, tol=cfg.kkt_rtol, max_iter=cfg.max_iter
            )
        except (SingularConfiguration, ValueError) as exc:
            rec.update(objective=math.nan, iterations=0, converged=False, kkt_residual=math.nan)
            rec["error"] = str(exc)
            yield ctx, rec, None
            continue
        prev = sol.minimizer
        rec.update(
            objective=sol.objective,
            iterations=sol.iterations,
            converged=sol.converged,
            kkt_residual=sol.kkt_residual,
        )
        yield ctx, rec, sol


def run_convergence_study(cfg: StudyConfig) -> StudyResult:
    """Discrete minima against the limit minimum across ``cfg.n_list``.

    The verdict is "consistent" when both the energy gap and the W1
    distance to the continuum minimiser are non-increasing within
    :data:`VERDICT_BAND` over the last :data:`VERDICT_WINDOW` values of n.
    """
    report = classify(cfg.params)
    xi_lim, e_lim = _limit_problem(report, cfg.m_continuum)
    records = []
    for _, rec, sol in _solve_sequence(cfg, report):
        if sol is not None:
            rec["gap"] = abs(sol.objective - e_lim)
            rec["w1"] = w1_distance(EmpiricalMeasure(sol.minimizer), xi_lim)
        else:
            rec["gap"] = rec["w1"] = math.nan
        records.append(rec)
    gap_ok = non_increasing_within([r["gap"] for r in records])
    w1_ok = non_increasing_within([r["w1"] for r in records])
    verdict = "consistent" if gap_ok and w1_ok else "inconclusive"
    result = StudyResult(
        report, records, e_lim, verdict, {"gap_non_increasing": gap_ok, "w1_non_increasing": w1_ok}
    )
    if cfg.output_dir is not None:
        write_study(cfg, result, ["n", "objective", "gap", "w1", "iterations", "converged", "kkt_residual"])
    return result


def run_log_study(cfg: StudyConfig) -> StudyResult:
    """Log-rescaled energy of minimisers packed into ``[0, 1/M]``.

    The limit value is ``1 - 1/M``.  The verdict is "consistent" when the
    distance to it is non-increasing within the band over the last values
    of n.
    """
    report = classify(cfg.params)
    if report.p != 5 or report.q not in (2, 3):
        raise ConfigError(f"log study needs regime (5, 2) or (5, 3), got ({report.p}, {report.q})")
    target = 1.0 - 1.0 / cfg.M
    records = []
    for ctx, rec, sol in _solve_sequence(cfg, report, upper=1.0 / cfg.M):
        if sol is not None:
            val = log_rescaled_energy(ctx, sol.minimizer)
            rec["alpha_n"] = ctx.alpha_n
            rec["log_energy"] = val
            rec["error_to_limit"] = abs(val - target)
            rec["error_bound"] = 3.0 / ctx.alpha_n
        records.append(rec)
    ok = non_increasing_within([r.get("error_to_limit", math.nan) for r in records])
    result = StudyResult(
        report,
        records,
        target,
        "consistent" if ok else "inconclusive",
        {"error_non_increasing": ok, "M": cfg.M},
        kind="log",
    )
    if cfg.output_dir is not None:
        write_study(
            cfg,
            result,
            ["n", "alpha_n", "objective", "log_energy", "error_to_limit", "error_bound", "iterations", "converged"],
        )
    return result


def _fmt(v):
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % float(v)


def write_study(cfg: StudyConfig, result: StudyResult, columns):
    """Write ``<kind>_study.csv`` and ``<kind>_summary.json`` into the output dir."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = result.regime
    lines = [
        f"# kind={result.kind}",
        f"# regime=({rep.p},{rep.q})",
        f"# continuum_objective={_fmt(result.continuum_objective)}",
        f"# verdict={result.verdict}",
        ",".join(columns),
    ]
    for r in result.records:
        lines.append(",".join(_fmt(r.get(c, math.nan)) for c in columns))
    (out / f"{result.kind}_study.csv").write_text("\n".join(lines) + "\n")
    summary = {"config": cfg.to_dict(), **result.to_dict()}
    (out / f"{result.kind}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def read_study_csv(path):
    """Parse a study CSV into (metadata dict, column names, rows of floats)."""
    meta, cols, rows = {}, None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        elif cols is None:
            cols = line.split(",")
        elif line:
            rows.append([float(t) for t in line.split(",")])
    return meta, cols, rows

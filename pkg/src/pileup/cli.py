"""Command-line entry point: ``pileup <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 solver non-convergence,
3 unclassifiable regime.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import potential
from .continuum import LimitConstants, minimize_limit
from .discrete_energy import context_at, energy_parts
from .exceptions import ConfigError, Unclassifiable
from .measures import QuantileFn, density_from_quantile
from .optimizer import minimize_discrete
from .scaling import ParamSequences, classify
from .study import StudyConfig, run_convergence_study, run_log_study

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_UNCLASSIFIABLE = 0, 1, 2, 3
FMT = "%.17g"


class _Fail(Exception):
    def __init__(self, code, msg):
        super().__init__(msg)
        self.code = code


def _load_json(path):
    if path is None:
        raise _Fail(EXIT_CONFIG, "--config is required")
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise _Fail(EXIT_CONFIG, f"cannot read {path}: {exc}") from exc


def _load_params(path):
    d = _load_json(path)
    if "params" in d:
        d = d["params"]
    try:
        return ParamSequences.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise _Fail(EXIT_CONFIG, f"bad model config {path}: {exc}") from exc


def _out_path(args, default_name):
    """Explicit ``--out`` file, else ``default_name`` inside the global out dir."""
    if args.out is not None:
        p = Path(args.out)
    else:
        p = Path(args.out_dir or ".") / default_name
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _write_csv(path, meta, columns, rows):
    lines = [f"# {k}={v}" for k, v in meta.items()]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(str(v) if isinstance(v, (int, np.integer)) else FMT % v for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (float, np.floating)) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if isinstance(x, np.generic):
        return x.item()
    return x


def _dump(obj):
    return json.dumps(_json_safe(obj), indent=2, sort_keys=True)


def _read_positions(path):
    """Last numeric column of a CSV (``#`` lines and a header row skipped)."""
    vals = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_CONFIG, f"cannot read {path}: {exc}") from exc
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals.append(float(line.split(",")[-1]))
        except ValueError:
            continue
    if not vals:
        raise _Fail(EXIT_CONFIG, f"no positions found in {path}")
    return np.array(vals)


def cmd_classify(args):
    report = classify(_load_params(args.config))
    print(_dump(report.to_dict()))
    return EXIT_OK


def cmd_potential_table(args):
    if not (0 < args.rmin < args.rmax) or args.steps < 2:
        raise _Fail(EXIT_CONFIG, "need 0 < rmin < rmax and steps >= 2")
    r = np.linspace(args.rmin, args.rmax, args.steps)
    V, dV = potential.eval_V(r), potential.eval_dV(r)
    path = _out_path(args, "potential.csv")
    _write_csv(path, {"rmin": FMT % args.rmin, "rmax": FMT % args.rmax, "steps": args.steps},
               ["r", "V", "dV"], zip(r, V, dV))
    print(path)
    return EXIT_OK


def cmd_energy(args):
    params = _load_params(args.config)
    x = _read_positions(args.positions)
    ctx = context_at(params, x.size)
    try:
        parts = energy_parts(ctx, x)
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from exc
    print(_dump({"n": int(x.size), "p": ctx.p, "q": ctx.q, **parts}))
    return EXIT_OK


def cmd_minimize(args):
    params = _load_params(args.config)
    if args.n < 1:
        raise _Fail(EXIT_CONFIG, "--n must be positive")
    report = classify(params)
    ctx = context_at(params, args.n, report)
    sol = minimize_discrete(ctx, args.n)
    path = _out_path(args, f"minimizer_n{args.n}.csv")
    _write_csv(path, {"n": args.n, "regime": f"({ctx.p},{ctx.q})", "objective": FMT % sol.objective},
               ["index", "position"], zip(range(1, args.n + 1), sol.minimizer))
    summary = {"n": args.n, "regime": [report.p, report.q], **sol.summary()}
    path.with_suffix(".json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def cmd_limit_minimize(args):
    if args.p not in (1, 2, 3, 4, 5) or args.q not in (0, 1, 2, 3):
        raise _Fail(EXIT_CONFIG, "need p in 1..5 and q in 0..3")
    if args.m < 2:
        raise _Fail(EXIT_CONFIG, "--m must be at least 2")
    const = LimitConstants.from_dict(_load_json(args.constants)) if args.constants else LimitConstants()
    try:
        sol = minimize_limit(args.p, args.q, const, args.m)
    except ValueError as exc:
        raise _Fail(EXIT_CONFIG, str(exc)) from exc
    path = _out_path(args, f"limit_p{args.p}_q{args.q}.csv")
    meta = {"regime": f"({args.p},{args.q})", "m": args.m, "objective": FMT % sol.objective}
    try:
        rho = density_from_quantile(QuantileFn(sol.minimizer), args.m)
        _write_csv(path, meta, ["x", "rho"], zip(rho.centers, rho.density))
        form = "density"
    except ValueError:
        # minimiser with an atom: fall back on the quantile function itself
        s = (np.arange(args.m) + 0.5) / args.m
        _write_csv(path, {**meta, "note": "atomic part present"}, ["s", "xi"], zip(s, sol.minimizer))
        form = "quantile"
    summary = {"regime": [args.p, args.q], "m": args.m, "constants": const.to_dict(), "output": form,
               **sol.summary()}
    path.with_suffix(".json").write_text(_dump(summary) + "\n")
    print(_dump(summary))
    return EXIT_OK if sol.converged else EXIT_NONCONVERGED


def _study_config(args):
    d = _load_json(args.config)
    if "params" not in d:
        # a bare model config
        d = {"params": d}
    if args.n_list:
        d["n_list"] = [int(t) for t in args.n_list.split(",")]
    if args.m_continuum is not None:
        d["m_continuum"] = args.m_continuum
    if args.out is not None:
        d["output_dir"] = args.out
    elif d.get("output_dir") is None:
        d["output_dir"] = args.out_dir or "."
    if getattr(args, "M", None) is not None:
        d["M"] = args.M
    return StudyConfig.from_dict(d)


def _report_study(result):
    print(_dump({k: v for k, v in result.to_dict().items() if k != "records"}))
    for r in result.records:
        print(" ".join(f"{k}={FMT % v if isinstance(v, float) else v}" for k, v in r.items()))
    return EXIT_OK if all(r.get("converged") for r in result.records) else EXIT_NONCONVERGED


def cmd_converge_study(args):
    return _report_study(run_convergence_study(_study_config(args)))


def cmd_log_study(args):
    return _report_study(run_log_study(_study_config(args)))


def build_parser():
    # global flags may be given before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="model or study JSON")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="accepted for compatibility; solves run single-threaded")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="accepted for compatibility; all runs are deterministic")

    parser = argparse.ArgumentParser(prog="pileup", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--out", dest="out_dir", default=None, help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help):
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(func=func)
        return sp

    add("classify", cmd_classify, "print the regime report of a model")

    sp = add("potential-table", cmd_potential_table, "tabulate V and V' on a grid")
    sp.add_argument("--rmin", type=float, default=0.01)
    sp.add_argument("--rmax", type=float, default=10.0)
    sp.add_argument("--steps", type=int, default=1000)
    sp.add_argument("--out", default=None, help="CSV file")

    sp = add("energy", cmd_energy, "energy parts of a configuration")
    sp.add_argument("--positions", required=True, help="CSV whose last column holds positions")

    sp = add("minimize", cmd_minimize, "minimise the discrete energy")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out", default=None, help="CSV file; a JSON sidecar is written next to it")

    sp = add("limit-minimize", cmd_limit_minimize, "minimise a limit energy")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--constants", default=None, help="JSON with c_tilde, Lambda, beta, C")
    sp.add_argument("--m", type=int, default=800)
    sp.add_argument("--out", default=None, help="CSV file; a JSON sidecar is written next to it")

    sp = add("converge-study", cmd_converge_study, "discrete-to-continuum convergence study")
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--n-list", default=None, help="comma-separated wall numbers")
    sp.add_argument("--m-continuum", type=int, default=None)

    sp = add("log-study", cmd_log_study, "log-rescaled energies of packed minimisers")
    sp.add_argument("--n-list", default=None, help="comma-separated wall numbers")
    sp.add_argument("--m-continuum", type=int, default=None)
    sp.add_argument("--M", type=float, default=None, help="pack walls into [0, 1/M]")
    sp.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    # the parents share action objects, so defaults are filled in here
    for name, default in (("config", None), ("threads", 1), ("seed", 0), ("out", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Unclassifiable as exc:
        print(f"unclassifiable regime: {exc}", file=sys.stderr)
        return EXIT_UNCLASSIFIABLE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

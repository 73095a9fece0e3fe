"""Command-line interface: ``gridppp <subcommand> [flags]``.

Tables go to standard output (or ``--output``) as CSV by default, or as a
JSON array of objects with ``--format json``.  Exit status is 0 on success,
2 on usage errors and 1 on runtime failures.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import re
import sys

import numpy as np

from . import __version__
from .association import assoc_bounds, assoc_prob_ppp
from .coverage import CoverageQuery, coverage_curve
from .distributions import DistanceLaw
from .interference import LatticeWindow
from .model import BoundedSingleSlope, DualSlope, ModelConfig, PowerLaw, SirThreshold
from .montecarlo import estimate_association, estimate_coverage, simulate
from .processes import SimWindow, sample_superposition
from .quadrature import QuadratureSpec

__all__ = ["main", "run", "emit_table", "format_value", "parse_range", "UsageError"]

ENV_ABS_TOL = "GRIDPPP_ABS_TOL"


class UsageError(Exception):
    """Invalid flag combination detected after parsing."""


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    return v


def emit_table(rows, fmt="csv", destination=None, columns=None) -> str:
    """Serialise homogeneous ``rows`` (dicts) as CSV or JSON.

    Returns the text; also writes it to ``destination`` (path or stream) when
    given.  CSV uses ``\\n`` line endings and 17 significant digits.
    """
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    for r in rows:
        if list(r.keys()) != list(columns):
            raise ValueError("rows must share the same keys in the same order")
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_value(r[c]) for c in columns])
        text = buf.getvalue()
    elif fmt == "json":
        text = json.dumps([_json_value(r) for r in rows], indent=None) + "\n"
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _write(text, destination)
    return text


def _write(text, destination):
    if destination is None:
        return
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def parse_range(text: str):
    """``start:stop:step`` (inclusive of ``stop`` when reached) or a single value."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from None
    if len(nums) == 1:
        return [nums[0]]
    if len(nums) != 3:
        raise argparse.ArgumentTypeError(f"range must be start:stop:step, got {text!r}")
    start, stop, step = nums
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"range needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _nonneg(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return v


def _alpha(text):
    v = float(text)
    if not v > 2:
        raise argparse.ArgumentTypeError(f"path-loss exponent must exceed 2, got {text!r}")
    return v


def _count(minimum):
    def conv(text):
        v = int(text)
        if v < minimum:
            raise argparse.ArgumentTypeError(f"expected an integer >= {minimum}, got {text!r}")
        return v
    return conv


def _default_abs_tol():
    raw = os.environ.get(ENV_ABS_TOL)
    if raw is None:
        return 1e-5
    try:
        v = float(raw)
    except ValueError:
        raise UsageError(f"{ENV_ABS_TOL} must be a number, got {raw!r}") from None
    if not v > 0:
        raise UsageError(f"{ENV_ABS_TOL} must be positive")
    return v


# ---------------------------------------------------------------------------
# subcommands


def _cmd_coverage(a):
    abs_tol = a.abs_tol if a.abs_tol is not None else _default_abs_tol()
    q = CoverageQuery(a.rho_lambda, a.eta, a.alpha, SirThreshold(1.0),
                      LatticeWindow(n=a.lattice_n),
                      QuadratureSpec(abs_tol=abs_tol, rel_tol=abs_tol / 10))
    res = coverage_curve(q, a.t_db, a.method, w_n=a.window_n, threads=a.threads)
    return [{"t_db": t, "p_cov": r.p_cov, "method": r.method, "err_bound": r.error_bound}
            for t, r in zip(a.t_db, res)]


def _cmd_associate(a):
    rows = []
    for rl in a.rho_lambda:
        rho = rl * a.eta ** (2 / a.alpha)
        p = assoc_prob_ppp(rl, a.eta, a.alpha)
        row = {"rho_lambda": rl, "eta": a.eta, "alpha": a.alpha, "rho": rho,
               "p_assoc_ppp": p, "p_assoc_grid": 1 - p}
        if a.bounds:
            lo, up = assoc_bounds(rho)
            row.update({"lower": lo.p_assoc_ppp, "upper": up.p_assoc_ppp})
        rows.append(row)
    return rows


def _cmd_ndist(a):
    if a.component in ("grid", "both") and not a.lambda_g > 0:
        raise UsageError("--lambda-g must be positive for the grid component")
    if a.component in ("ppp", "both") and not a.lambda_p > 0:
        raise UsageError("--lambda-p must be positive for the ppp component")
    s = 1 / math.sqrt(a.lambda_g) if a.lambda_g > 0 else None
    kind = {"grid": "grid", "ppp": "ppp", "both": "superposition"}[a.component]
    law = DistanceLaw(kind, s, a.lambda_p)
    return [{"r": r, "cdf": float(law.cdf(r)), "pdf": float(law.pdf(r))} for r in a.r]


def _pathloss(a):
    if a.pathloss == "power":
        return PowerLaw(a.alpha)
    if a.c0 is None:
        raise UsageError("--c0 is required for bounded path loss")
    if a.pathloss == "bounded":
        return BoundedSingleSlope(a.c0, a.alpha)
    if a.r1 is None or a.alpha2 is None:
        raise UsageError("--r1 and --alpha2 are required for dual-slope path loss")
    return DualSlope(a.c0, a.r1, a.alpha, a.alpha2)


def _config(a):
    if a.lambda_g == 0 and a.lambda_p == 0:
        raise UsageError("at least one of --lambda-g, --lambda-p must be positive")
    return ModelConfig(a.lambda_g, a.lambda_p, a.p_g, a.p_p, a.alpha, a.grid_kind)


def _cmd_simulate(a):
    cfg = _config(a)
    pl = _pathloss(a)
    win = SimWindow(a.window_m)
    if a.quantity == "association":
        est = estimate_association(cfg, a.trials, a.seed, win, a.threads, pl)
        return [{"quantity": "p_assoc_ppp", "t_db": None, "value": est.value, "ci_low": est.ci_low,
                 "ci_high": est.ci_high, "trials": est.trials, "seed": a.seed}]
    if a.trials < 1000:
        raise UsageError("coverage simulation needs --trials >= 1000")
    res = simulate(cfg, pl, win, a.trials, a.seed, a.threads)
    ests = estimate_coverage(cfg, pl, [SirThreshold.from_db(t) for t in a.t_db], a.trials, a.seed,
                             win, result=res)
    return [{"quantity": "p_cov", "t_db": t, "value": e.value, "ci_low": e.ci_low,
             "ci_high": e.ci_high, "trials": e.trials, "seed": a.seed}
            for t, e in zip(a.t_db, ests)]


def _load(a):
    from .fitting import read_deployment_csv

    try:
        return read_deployment_csv(a.input, None if a.coords == "auto" else a.coords)
    except OSError as exc:
        raise UsageError(f"cannot read {a.input}: {exc.strerror or exc}") from None


def _cmd_fit(a):
    from .fitting import fit_model

    data = _load(a)
    fm = fit_model(data, a.bandwidth)
    out = fm.to_dict()
    out["n_points"] = len(data)
    out["units"] = "km" if data.source_crs == "latlon" else "input"
    if a.predict_coverage:
        res = fm.predict_coverage(a.t_db, a.alpha, a.eta, threads=a.threads)
        out["alpha"] = a.alpha
        out["coverage_curve"] = [{"t_db": t, "p_cov": r.p_cov, "method": r.method,
                                  "err_bound": r.error_bound} for t, r in zip(a.t_db, res)]
    return out


def _cmd_paircorr(a):
    from .fitting import estimate_pcf

    data = _load(a)
    pcf = estimate_pcf(data, a.bandwidth)
    return [{"r": r, "g_hat": g, "kappa_avg": pcf.kappa_avg, "lambda_hat": pcf.lambda_hat,
             "bandwidth": pcf.bandwidth} for r, g in zip(pcf.r_grid, pcf.g_hat)]


def _cmd_sample(a):
    cfg = _config(a)
    rng = np.random.default_rng(np.random.SeedSequence(a.seed))
    ps = sample_superposition(cfg, SimWindow(a.window_m), rng)
    return [{"x": x, "y": y, "label": lab} for x, y, lab in ps.rows()]


# ---------------------------------------------------------------------------
# parser


def _add_output(p, json_only=False):
    if json_only:
        p.add_argument("--format", choices=["json"], default="json", help="output format (JSON object)")
    else:
        p.add_argument("--format", choices=["csv", "json"], default="csv",
                       help="output format: csv (default) or json array of objects")
    p.add_argument("--output", default=None, help="write output to this file instead of stdout")


def _add_model(p, need_grid=True):
    p.add_argument("--lambda-g", type=_nonneg, default=1.0,
                   help="grid intensity (stations per unit area, 0 disables the grid; default 1)")
    p.add_argument("--lambda-p", type=_nonneg, default=1.0, help="PPP intensity (default 1)")
    p.add_argument("--p-g", type=_positive, default=1.0, help="grid transmit power (default 1)")
    p.add_argument("--p-p", type=_positive, default=1.0, help="PPP transmit power (default 1)")
    p.add_argument("--alpha", type=_alpha, default=4.0, help="path-loss exponent > 2 (default 4)")
    p.add_argument("--grid-kind", choices=["grid", "ppp"], default="grid",
                   help="'grid' for the shifted lattice, 'ppp' to replace it by an independent PPP")
    p.add_argument("--window-m", type=_count(3), default=12,
                   help="torus side in grid spacings (default 12)")
    p.add_argument("--seed", type=_count(0), default=0, help="master random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gridppp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("coverage", help="analytic coverage probability curve")
    p.add_argument("--rho-lambda", type=_nonneg, required=True, help="intensity ratio lambda_p/lambda_g")
    p.add_argument("--eta", type=_positive, default=1.0, help="power ratio p_p/p_g (default 1)")
    p.add_argument("--alpha", type=_alpha, default=4.0, help="path-loss exponent > 2 (default 4)")
    p.add_argument("--t-db", type=parse_range, default=[0.0],
                   help="SIR thresholds in dB: value or inclusive start:stop:step")
    p.add_argument("--method", choices=["exact", "lower", "upper", "ppp_limit"], default="exact",
                   help="exact value, bounds, or the pure-PPP limit")
    p.add_argument("--window-n", type=_count(0), default=0,
                   help="upper bound keeps grid interferers within |z|_inf <= N cells (default 0)")
    p.add_argument("--lattice-n", type=_count(1), default=12,
                   help="lattice window for exact/lower evaluation (default 12)")
    p.add_argument("--abs-tol", type=_positive, default=None,
                   help=f"quadrature absolute tolerance (default 1e-5 or ${ENV_ABS_TOL})")
    p.add_argument("--threads", type=_count(1), default=1, help="evaluate thresholds in parallel")
    _add_output(p)
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("associate", help="association probabilities and closed-form bounds")
    p.add_argument("--rho-lambda", type=parse_range, required=True,
                   help="intensity ratio, value or start:stop:step (must be > 0)")
    p.add_argument("--eta", type=_positive, default=1.0, help="power ratio p_p/p_g (default 1)")
    p.add_argument("--alpha", type=_alpha, default=4.0, help="path-loss exponent > 2 (default 4)")
    p.add_argument("--bounds", action="store_true", help="add lower/upper bound columns")
    _add_output(p)
    p.set_defaults(func=_cmd_associate)

    p = sub.add_parser("ndist", help="nearest-station distance CDF and PDF")
    p.add_argument("--lambda-g", type=_nonneg, default=1.0, help="grid intensity (default 1)")
    p.add_argument("--lambda-p", type=_nonneg, default=1.0, help="PPP intensity (default 1)")
    p.add_argument("--component", choices=["grid", "ppp", "both"], default="both",
                   help="distance to the grid, the PPP, or either (default both)")
    p.add_argument("--r", type=parse_range, default=parse_range("0:1.5:0.05"),
                   help="radii, value or start:stop:step (default 0:1.5:0.05)")
    _add_output(p)
    p.set_defaults(func=_cmd_ndist)

    p = sub.add_parser("simulate", help="Monte Carlo coverage or association estimate")
    _add_model(p)
    p.add_argument("--pathloss", choices=["power", "bounded", "dual"], default="power",
                   help="path-gain law (default power)")
    p.add_argument("--c0", type=_positive, default=None, help="gain cap for bounded/dual path loss")
    p.add_argument("--r1", type=_positive, default=None, help="breakpoint distance for dual-slope")
    p.add_argument("--alpha2", type=_alpha, default=None, help="far-field exponent for dual-slope")
    p.add_argument("--quantity", choices=["coverage", "association"], default="coverage",
                   help="estimate coverage (default) or P(served by PPP)")
    p.add_argument("--t-db", type=parse_range, default=[0.0],
                   help="SIR thresholds in dB: value or inclusive start:stop:step")
    p.add_argument("--trials", type=_count(1), default=10_000, help="number of user drops")
    p.add_argument("--threads", type=_count(1), default=1,
                   help="worker threads (output does not depend on this)")
    _add_output(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit rho_lambda to station coordinates")
    p.add_argument("--input", required=True, help="CSV with header lat,lon or x,y")
    p.add_argument("--coords", choices=["auto", "latlon", "planar"], default="auto",
                   help="expected coordinate columns (default: from header)")
    p.add_argument("--bandwidth", type=_positive, default=None,
                   help="kernel bandwidth (default 0.15/sqrt(lambda))")
    p.add_argument("--alpha", type=_alpha, default=4.0, help="path-loss exponent for prediction")
    p.add_argument("--eta", type=_positive, default=1.0, help="power ratio for prediction")
    p.add_argument("--predict-coverage", action="store_true",
                   help="add the predicted coverage curve of the fitted model")
    p.add_argument("--t-db", type=parse_range, default=parse_range("-10:20:2"),
                   help="thresholds for --predict-coverage (default -10:20:2)")
    p.add_argument("--threads", type=_count(1), default=1, help="evaluate thresholds in parallel")
    _add_output(p, json_only=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("paircorr", help="pair-correlation estimate of station coordinates")
    p.add_argument("--input", required=True, help="CSV with header lat,lon or x,y")
    p.add_argument("--coords", choices=["auto", "latlon", "planar"], default="auto",
                   help="expected coordinate columns (default: from header)")
    p.add_argument("--bandwidth", type=_positive, default=None,
                   help="kernel bandwidth (default 0.15/sqrt(lambda))")
    _add_output(p)
    p.set_defaults(func=_cmd_paircorr)

    p = sub.add_parser("sample", help="dump one network realisation as x,y,label")
    _add_model(p)
    _add_output(p)
    p.set_defaults(func=_cmd_sample)
    return parser


_NEGATIVE_VALUE = re.compile(r"^-[0-9.][0-9.:eE+-]*$")


def _attach_negative_values(argv):
    """Rewrite ``--flag -10:20:2`` as ``--flag=-10:20:2`` so ranges may start below zero."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NEGATIVE_VALUE.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "associate" and any(r <= 0 for r in args.rho_lambda):
        print("gridppp associate: error: --rho-lambda must be positive", file=stderr)
        return 2
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"gridppp {args.command}: error: {exc}", file=stderr)
        return 2
    except Exception as exc:  # numeric or I/O failure
        print(f"gridppp {args.command}: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    try:
        if isinstance(result, dict):
            text = json.dumps(_json_value(result)) + "\n"
            _write(text, args.output or stdout)
        else:
            emit_table(result, args.format, args.output or stdout)
    except OSError as exc:
        print(f"gridppp {args.command}: cannot write output: {exc}", file=stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

"""Command-line entry point: ``nvfuse {estimate,newsvendor,simulate,describe}``.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import _accel
from .bootstrap import BootstrapSettings
from .combine import COV_SCALINGS, AdditionalSource, Method, Problem, estimate
from .data import ValidationError, load_csv
from .newsvendor import NewsvendorInstance, order_quantity, quantile_descriptor
from .simulate import Scenario, convergence_sweep, run_scenario
from .stats import StatisticDescriptor, correlation_matrix, sample_mean, sample_median, sample_variance

log = logging.getLogger("nvfuse")

CONFIG_FIELDS = {"target", "sources", "method", "nboots", "seed", "eig_cutoff", "cov_scaling"}


class UsageError(ValidationError):
    pass


def _num(x):
    """Round floats to 10 significant digits for stable, diffable output."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(f"{x:.10g}") if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x


def _dump(obj) -> str:
    return json.dumps(_num(obj), indent=2)


def _read_json(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"no such file: {path}")
    text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _text_report(pairs) -> str:
    width = max(len(k) for k, _ in pairs)
    out = []
    for k, v in pairs:
        if isinstance(v, float):
            v = f"{v:.10g}"
        elif isinstance(v, (list, tuple)):
            v = ", ".join(f"{x:.10g}" if isinstance(x, float) else str(x) for x in v)
        out.append(f"{k.ljust(width)}  {v}")
    return "\n".join(out)


# --- estimate --------------------------------------------------------------

def load_config(obj: dict, args) -> dict:
    if not isinstance(obj, dict):
        raise UsageError("config must be a JSON object")
    extra = set(obj) - CONFIG_FIELDS
    if extra:
        raise UsageError(f"unknown config fields {sorted(extra)}")
    if "target" not in obj:
        raise UsageError("config is missing 'target'")
    sources = obj.get("sources")
    if not isinstance(sources, list) or not sources:
        raise UsageError("sources: at least one additional source required")
    target = StatisticDescriptor.from_json(obj["target"])
    parsed = []
    for i, s in enumerate(sources):
        try:
            parsed.append(AdditionalSource.from_json(s))
        except ValidationError as exc:
            raise UsageError(f"sources[{i}]: {exc}") from None
    cfg = {
        "problem": Problem(target, parsed),
        "method": obj.get("method", "mvar"),
        "nboots": obj.get("nboots", 5000),
        "seed": obj.get("seed", 0),
        "eig_cutoff": obj.get("eig_cutoff", 1.0),
        "cov_scaling": obj.get("cov_scaling", "n-1"),
    }
    for key in ("method", "nboots", "seed", "eig_cutoff", "cov_scaling"):
        override = getattr(args, key)
        if override is not None:
            cfg[key] = override
    if cfg["method"] not in ("mvar", "mmse"):
        raise UsageError(f"method: expected 'mvar' or 'mmse', got {cfg['method']!r}")
    if cfg["cov_scaling"] not in COV_SCALINGS:
        raise UsageError(f"cov_scaling: expected one of {COV_SCALINGS}, got {cfg['cov_scaling']!r}")
    ec = cfg["eig_cutoff"]
    if isinstance(ec, bool) or not isinstance(ec, (int, float)) or not 0 < ec <= 1:
        raise UsageError(f"eig_cutoff: must lie in (0, 1], got {ec!r}")
    for key in ("nboots", "seed"):
        if isinstance(cfg[key], bool) or not isinstance(cfg[key], int):
            raise UsageError(f"{key}: must be an integer, got {cfg[key]!r}")
    try:
        cfg["settings"] = BootstrapSettings(cfg["nboots"], cfg["seed"])
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def cmd_estimate(args) -> str:
    d = load_csv(args.data)
    cfg = load_config(_read_json(args.config), args)
    problem = cfg["problem"]
    problem.check(d)
    res = estimate(d, problem, cfg["settings"], float(cfg["eig_cutoff"]), Method(cfg["method"]),
                   cov_scaling=cfg["cov_scaling"])
    report = {
        "theta_est": res.theta_est,
        "theta_est_var": res.theta_est_var,
        "theta_hat": res.theta_hat,
        "theta_hat_var": res.theta_hat_var,
        "delta_hat": list(res.delta_hat),
        "correction": res.correction,
        "retained_eigs": res.retained_eigs,
        "method": res.method.value,
        "seed": cfg["seed"],
        "nboots": cfg["nboots"],
        "eig_cutoff": float(cfg["eig_cutoff"]),
        "cov_scaling": cfg["cov_scaling"],
        "eta_hat": list(res.eta_hat),
        "relevance": res.relevance,
        "variance_clamped": res.variance_clamped,
    }
    if args.output == "json":
        return _dump(report)
    return _text_report(list(report.items()))


# --- newsvendor ------------------------------------------------------------

def cmd_newsvendor(args) -> str:
    if not args.price > args.cost > 0:
        raise UsageError(f"need price > cost > 0, got price={args.price} cost={args.cost}")
    d = load_csv(args.data)
    column = args.column or d.names[0]
    d[column]
    inst = NewsvendorInstance(args.price, args.cost, column)
    decimals = None if args.exact_fractile else 4
    desc = quantile_descriptor(inst, args.model, decimals)
    q = order_quantity(d, inst, args.model, decimals)
    report = {"column": column, "price": args.price, "cost": args.cost, "model": args.model,
              "critical_fractile": inst.fractile, "level_used": desc.level, "order_quantity": q}
    if args.output == "json":
        return _dump(report)
    return _text_report(list(report.items()))


# --- simulate --------------------------------------------------------------

def cmd_simulate(args) -> str:
    scenario = Scenario.from_json(_read_json(args.scenario))
    if args.sweep:
        try:
            grid = [int(x) for x in args.sweep.split(",")]
        except ValueError:
            raise UsageError(f"--sweep expects comma-separated integers, got {args.sweep!r}") from None
        res = convergence_sweep(scenario, grid)
        return _dump({"sweep": res.to_json()}) if args.output == "json" else res.to_table()
    metrics = run_scenario(scenario)
    return _dump(metrics.to_json()) if args.output == "json" else metrics.to_table()


# --- describe --------------------------------------------------------------

def cmd_describe(args) -> str:
    d = load_csv(args.data)
    cols = {}
    for name in d.names:
        x = d[name]
        cols[name] = {"n": d.n_rows, "mean": sample_mean(x), "variance": sample_variance(x),
                      "median": sample_median(x), "min": float(x.min()), "max": float(x.max())}
    corr = correlation_matrix(d)
    report = {"columns": cols, "correlation": {"names": d.names, "matrix": corr.tolist()}}
    if args.output == "json":
        return _dump(report)
    head = ("column", "n", "mean", "variance", "median", "min", "max")
    rows = [head] + [(k, *(f"{v[h]:.10g}" for h in head[1:])) for k, v in cols.items()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
    lines.append("")
    lines.append("correlation")
    w = max(max(len(n) for n in d.names), 8)
    lines.append(" " * w + "  " + "  ".join(n.rjust(8) for n in d.names))
    for name, row in zip(d.names, corr):
        lines.append(name.ljust(w) + "  " + "  ".join(f"{v:8.4f}" for v in row))
    return "\n".join(lines)


# --- wiring ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nvfuse", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    ap.add_argument("--threads", type=int, default=None,
                    help="worker threads for the bootstrap kernels (numba backend)")
    sub = ap.add_subparsers(dest="command", required=True)

    def output_flag(p):
        p.add_argument("--output", choices=("json", "text"), default="json")

    p = sub.add_parser("estimate", help="fuse an empirical estimate with additional information")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("mvar", "mmse"))
    p.add_argument("--nboots", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--eig-cutoff", dest="eig_cutoff", type=float)
    p.add_argument("--cov-scaling", dest="cov_scaling", choices=COV_SCALINGS)
    output_flag(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("newsvendor", help="critical fractile and optimal order quantity")
    p.add_argument("--data", required=True)
    p.add_argument("--price", type=float, required=True)
    p.add_argument("--cost", type=float, required=True)
    p.add_argument("--model", choices=("normal", "empirical"), default="normal")
    p.add_argument("--column", help="demand column (default: first column)")
    p.add_argument("--exact-fractile", action="store_true",
                   help="use the unrounded fractile instead of 4 decimals")
    output_flag(p)
    p.set_defaults(func=cmd_newsvendor)

    p = sub.add_parser("simulate", help="Monte Carlo comparison of the estimators")
    p.add_argument("--scenario", required=True)
    p.add_argument("--sweep", help="comma-separated sample sizes for a convergence sweep")
    output_flag(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("describe", help="per-column summary statistics and correlations")
    p.add_argument("--data", required=True)
    output_flag(p)
    p.set_defaults(func=cmd_describe)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    _accel.set_num_threads(args.threads)
    try:
        text = args.func(args)
    except (ValidationError, IndexError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(text + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``dickepump {steady,spectrum,sweep,metrology,oracle}``.

All rates and times are in units of the collective decay rate (``gamma = 1``).
Every output starts with the full configuration: CSV files carry ``# key=value``
comment lines before the column header, JSON documents a ``config`` object.
Nothing is random and no timestamps are written, so identical invocations
produce identical bytes.

Exit codes: 0 success, 2 bad arguments, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .core import ModelParams, inversion_variance, mean_inversion, mean_inversion_asymptotic
from .dynamics import (
    HysteresisError,
    IntegratorFailure,
    default_workers,
    hysteresis_width,
    relaxation_rate_cumulant,
)
from .fitting import HIGH_RATE_WINDOW, LOW_RATE_WINDOW, fit_power_law
from .metrology import DEFAULT_ETA, BudgetInfeasible, ProtocolBudget, steady_sensitivity, total_sensitivity
from .oracle import ThreeLevelParams, compare_with_effective
from .spectrum import build_sector, sector_spectrum

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
GAMMA = 1.0


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    """Shortest round-tripping representation; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


class Table:
    def __init__(self, columns, rows, extra=None):
        self.columns = list(columns)
        self.rows = rows
        self.extra = extra or {}

    def render(self, config: dict, fmt_name: str) -> str:
        if fmt_name == "json":
            doc = {"config": config, "columns": self.columns, "rows": self.rows, **self.extra}
            return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
        buf = io.StringIO()
        for k, v in config.items():
            buf.write(f"# {k}={v}\n")
        for k, v in self.extra.items():
            buf.write(f"# {k}={json.dumps(_jsonable(v), sort_keys=True)}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(fmt(v) for v in row) + "\n")
        return buf.getvalue()


def config_of(args, command: str) -> dict:
    cfg = {"tool": "dickepump", "version": __version__, "command": command, "gamma": 1.0}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "out", "summary", "fit", "format", "command") or value is None:
            continue
        cfg[key] = ",".join(fmt(v) for v in value) if isinstance(value, list) else fmt(value)
    return cfg


def write_text(path, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _grid(args) -> np.ndarray:
    if args.w is not None:
        return np.array([args.w])
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if not 0 < args.w_min <= args.w_max:
        raise UsageError("need 0 < --w-min <= --w-max")
    return np.linspace(args.w_min, args.w_max, args.points)


def _rates(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad rate list {text!r}") from exc
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("rates must be positive")
    return vals


def _ints(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


# --------------------------------------------------------------------------
# commands


def cmd_steady(args) -> Table:
    rows = []
    for w in _grid(args):
        p = ModelParams(args.n, GAMMA, float(w))
        rows.append((float(w), mean_inversion(p), mean_inversion_asymptotic(p), inversion_variance(p)))
    return Table(["w", "jz_exact", "jz_asymptotic", "variance"], rows)


def cmd_spectrum(args) -> Table:
    rows = []
    for w in _grid(args):
        p = ModelParams(args.n, GAMMA, float(w))
        spec = sector_spectrum(build_sector(p, args.sector))
        if args.gap_only:
            rows.append((float(w), args.sector, spec.gap, relaxation_rate_cumulant(p), spec.n_zero_modes))
            continue
        rates = spec.decay_rates
        if args.modes is not None:
            rates = rates[: args.modes]
        rows.extend((float(w), args.sector, i, float(r)) for i, r in enumerate(rates))
    if args.gap_only:
        return Table(["w", "q", "gap", "cumulant_rate", "zero_modes"], rows)
    return Table(["w", "q", "index", "decay_rate"], rows)


def _sweep_job(job):
    n, r, n_samples = job
    try:
        return hysteresis_width(ModelParams(n, GAMMA, GAMMA), r, n_samples=n_samples), None
    except (HysteresisError, IntegratorFailure) as exc:
        return None, str(exc)


def cmd_sweep(args):
    jobs = [(n, r, args.samples) for n in args.n for r in args.rates]
    workers = default_workers() if args.workers is None else args.workers
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]

    traces, summary = [], []
    for (n, r, _), (loop, err) in zip(jobs, results):
        if loop is None:
            summary.append((n, r, "failed", math.nan, math.nan, math.nan, math.nan))
            continue
        for branch in (loop.up, loop.down):
            traces.extend((n, r, branch.direction, float(w), float(jz)) for w, jz in zip(branch.w, branch.inversion))
        summary.append((n, r, "ok", loop.width, loop.scaled_width(n, GAMMA), loop.w_plus, loop.w_minus))
    failures = [f"N={n},r={r}: {err}" for (n, r, _), (loop, err) in zip(jobs, results) if loop is None]
    extra = {"failures": failures} if failures else None
    trace_table = Table(["n", "rate_r", "branch", "w", "jz"], traces, extra)
    summary_table = Table(["n", "rate_r", "status", "width", "scaled_width", "w_plus", "w_minus"], summary, extra)
    fits = None
    if args.fit:
        fits = {}
        for n in args.n:
            pts = [(r, s) for (nn, r, st, _, s, _, _) in summary if nn == n and st == "ok"]
            entry = {}
            for name, window in (("low", LOW_RATE_WINDOW), ("high", HIGH_RATE_WINDOW)):
                try:
                    f = fit_power_law(pts, window) if pts else None
                except ValueError:
                    f = None
                entry[name] = None if f is None else {
                    "window": list(window), "eta": f.exponent, "prefactor": f.prefactor,
                    "residual_rms": f.residual_rms, "n_points": f.n_points,
                }
            fits[str(n)] = entry
    return trace_table, summary_table, fits


def cmd_metrology(args) -> dict:
    p = ModelParams(args.n, GAMMA, args.w)
    rep = steady_sensitivity(p)
    sens = {
        "w": args.w,
        "delta_w_single": rep.delta_w_single,
        "delta_w_scaled": rep.delta_w_single * args.n / GAMMA,
        "delta_beta": rep.delta_beta,
        "fisher_beta": rep.fisher_beta,
        "cramer_rao_beta": rep.cramer_rao_beta,
        "saturation_ratio": rep.saturation_ratio,
    }
    rates = args.rates or [args.rate_r]
    budgets = []
    for r in rates:
        b = total_sensitivity(p, ProtocolBudget(args.T, args.C, r, args.eta))
        budgets.append({
            "rate_r": r, "eta": b.eta, "total_time": b.total_time, "scan_constant": b.scan_constant,
            "delta_w_single": b.delta_w_single, "scan_range": b.scan_range, "n_scans": b.n_scans,
            "delta_w_total": b.delta_w_total, "slow_branch": b.slow_branch, "fast_branch": b.fast_branch,
        })
    best = min(budgets, key=lambda b: b["delta_w_total"])
    return {"sensitivity": sens, "budget": budgets, "optimal_rate_r": best["rate_r"]}


def cmd_oracle(args) -> Table:
    tp = ThreeLevelParams(args.n, args.omega, args.delta, args.gamma_r, GAMMA, allow_large=args.allow_large)
    cmp = compare_with_effective(tp, args.t_final, args.points, basis=args.basis)
    rows = list(zip(cmp.times.tolist(), cmp.full.tolist(), cmp.effective.tolist(), cmp.r_population.tolist()))
    extra = {
        "pump_rate": tp.pump_rate,
        "valid": tp.is_valid(),
        "max_discrepancy": cmp.max_discrepancy,
    }
    return Table(["t", "jz_full", "jz_effective", "r_population"], rows, extra)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dickepump",
        description="Collectively pumped superradiance; all rates in units of gamma.",
    )
    parser.add_argument("--version", action="version", version=f"dickepump {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--out", default="-", help="output path ('-' for stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        return sp

    def grid(sp, lo=0.9, hi=1.1, points=401):
        sp.add_argument("--n", type=int, default=100, help="number of atoms")
        sp.add_argument("--w", type=float, help="single pump value (overrides the grid)")
        sp.add_argument("--w-min", type=float, default=lo)
        sp.add_argument("--w-max", type=float, default=hi)
        sp.add_argument("--points", type=int, default=points)

    sp = common(sub.add_parser("steady", help="steady-state inversion and variance versus w"))
    grid(sp)
    sp.set_defaults(func=cmd_steady)

    sp = common(sub.add_parser("spectrum", help="sector Liouvillian decay rates versus w"))
    grid(sp, points=41)
    sp.add_argument("--sector", type=int, default=0, help="off-diagonal index q")
    sp.add_argument("--modes", type=int, help="keep the slowest MODES rates per w")
    sp.add_argument("--gap-only", action="store_true", help="one row per w with the gap and the cumulant rate")
    sp.set_defaults(func=cmd_spectrum)

    sp = common(sub.add_parser("sweep", help="hysteresis loops and widths on an (N, r) grid"))
    sp.add_argument("--n", type=_ints, default=[100], help="comma list of atom numbers")
    sp.add_argument("--rates", type=_rates, help="comma list of scan rates r")
    sp.add_argument("--rate-r", type=float, help="single scan rate r")
    sp.add_argument("--samples", type=int, default=801, help="samples per branch")
    sp.add_argument("--workers", type=int, help="worker processes (default: DICKEPUMP_WORKERS or CPU count)")
    sp.add_argument("--summary", help="write the width table (CSV/JSON) to this path")
    sp.add_argument("--fit", help="write power-law fits per N (JSON) to this path")
    sp.set_defaults(func=cmd_sweep)

    sp = common(sub.add_parser("metrology", help="steady-state sensitivity and time budget"), fmt_default="json")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--w", type=float, default=1.0)
    sp.add_argument("--rate-r", type=float, default=1.0)
    sp.add_argument("--rates", type=_rates, help="comma list of scan rates for the budget curve")
    sp.add_argument("--T", type=float, default=1e6, help="total experiment time")
    sp.add_argument("--C", type=float, default=3.0, help="scan range in units of the single-scan uncertainty")
    sp.add_argument("--eta", type=float, default=DEFAULT_ETA)
    sp.set_defaults(func=cmd_metrology)

    sp = common(sub.add_parser("oracle", help="three-level model versus the effective two-level model"))
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--omega", type=float, default=2500.0)
    sp.add_argument("--delta", type=float, default=1e5)
    sp.add_argument("--gamma-r", type=float, default=1000.0)
    sp.add_argument("--t-final", type=float, default=10.0)
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--basis", choices=("symmetric", "full"), default="symmetric")
    sp.add_argument("--allow-large", action="store_true", help="permit up to 8 atoms")
    sp.set_defaults(func=cmd_oracle)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ARGS
    cfg = config_of(args, args.command)
    try:
        if args.command == "sweep":
            if args.rates is None:
                args.rates = [args.rate_r if args.rate_r is not None else 16.0]
            traces, summary, fits = cmd_sweep(args)
            outputs = [(args.out, traces.render(cfg, args.format))]
            if args.summary:
                outputs.append((args.summary, summary.render(cfg, args.format)))
            if args.fit:
                outputs.append((args.fit, json.dumps(_jsonable({"config": cfg, "fits": fits}), indent=2) + "\n"))
        elif args.command == "metrology":
            if args.format != "json":
                raise UsageError("metrology writes JSON only")
            doc = {"config": cfg, **cmd_metrology(args)}
            outputs = [(args.out, json.dumps(_jsonable(doc), indent=2) + "\n")]
        else:
            outputs = [(args.out, args.func(args).render(cfg, args.format))]
    except (IntegratorFailure, HysteresisError, BudgetInfeasible, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"dickepump: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError) as exc:
        print(f"dickepump: {exc}", file=sys.stderr)
        return EXIT_ARGS
    try:
        for path, text in outputs:
            write_text(path, text)
    except OSError as exc:
        print(f"dickepump: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line interface: ``censored-ldp {approx,sweep,wk,simulate,validate}``.

Exit codes: 0 success, 1 a validation criterion failed, 2 usage or domain
error, 3 quadrature did not converge.

Output schemas
--------------
CSV (``sweep``, and ``approx``/``simulate`` with ``--format csv``) starts with
``# key=value`` lines holding the resolved parameters, then a header row.
The formula columns are ``x, x_over_M, regime, k, value, term_0 .. term_6,
diagnostic``; unused term columns are empty. With Monte Carlo the columns
``mc_p, mc_se, bias_bound`` follow. JSON output is an object with a
``metadata`` block and a ``results`` list.

Reals are printed with ``repr``, the shortest string that parses back to the
identical double.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from .asymptotics import K_MAX, W, W1_closed, W2_closed, WalkConfig, approx_auto
from .distributions import make_standardized_pareto, parse_jump
from .errors import ConvergenceError, DomainError, RangeError
from .simulation import MCConfig, default_seed, estimate_plain, estimate_stratified, oracle_W_simplex
from .validation import FAIL, SuiteSettings, run_suite

EXIT_OK, EXIT_CRITERION, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3

TERM_COLUMNS = [f"term_{j}" for j in range(K_MAX + 1)]
FORMULA_COLUMNS = ["x", "x_over_M", "regime", "k", "value", *TERM_COLUMNS, "diagnostic"]
MC_COLUMNS = ["mc_p", "mc_se", "bias_bound"]
SIMULATE_COLUMNS = ["x", "x_over_M", "method", "p_hat", "std_err", "rel_se", "bias_bound", "y", "samples"]
WK_COLUMNS = ["k", "z", "alpha", "value", "closed_form", "oracle", "oracle_se", "oracle_bias_bound"]


def _num(v):
    """JSON-safe number: non-finite values become ``None``."""
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


# ---------------------------------------------------------------------------
# argument handling


def _model_from(args):
    if args.alpha is not None and args.jump is not None:
        model = parse_jump(args.jump)
        if model.alpha != args.alpha:
            raise DomainError("--alpha and --jump disagree")
        return model
    if args.alpha is not None:
        return make_standardized_pareto(args.alpha)
    return parse_jump(args.jump or "pareto:alpha=3")


def _walk_from(args) -> WalkConfig:
    return WalkConfig(args.n, args.M, _model_from(args))


def _mc_from(args) -> MCConfig:
    seed = default_seed() if args.seed is None else args.seed
    return MCConfig(samples=args.samples, seed=seed, k_cap=args.k_cap, workers=args.workers)


def _metadata(config: WalkConfig, args, mc: MCConfig | None = None) -> dict:
    meta = config.metadata()
    meta["eps"] = config.default_eps if args.eps is None else args.eps
    meta["h"] = config.default_h if args.h is None else args.h
    # Monte Carlo keys are always present so the schema does not vary
    meta.update(seed=None, samples=None, k_cap=None, y_factor=None)
    if mc is not None:
        meta.update(seed=mc.seed, samples=mc.samples, k_cap=mc.k_cap, y_factor=mc.y_factor)
    return {k: (_num(v) if isinstance(v, float) else v) for k, v in meta.items()}


def _x_grid(args) -> np.ndarray:
    if args.x is not None:
        xs = np.asarray(args.x, dtype=float)
    elif args.x_from is not None and args.x_to is not None:
        if args.points < 2:
            raise DomainError("--points must be at least 2")
        if not args.x_from < args.x_to:
            raise DomainError("--x-from must be smaller than --x-to")
        xs = np.linspace(args.x_from, args.x_to, args.points)
    else:
        raise DomainError("give --x or --x-from/--x-to/--points")
    if not np.all(xs > 0):
        raise DomainError("x must be positive")
    return xs


def _add_walk(p: argparse.ArgumentParser) -> None:
    p.add_argument("--jump", help="jump law, e.g. pareto:alpha=3 (default)")
    p.add_argument("--alpha", type=float, help="shorthand for --jump pareto:alpha=<value>")
    p.add_argument("--n", type=int, default=10**4, help="number of summands (default 10000)")
    p.add_argument("--M", type=float, default=3000.0, help="censoring level (default 3000)")
    p.add_argument("--eps", type=float, help="near-multiple half-width in units of M")
    p.add_argument("--h", type=float, help="interior margin in units of M")


def _add_mc(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=10**5, help="walks per stratum (default 100000)")
    p.add_argument("--seed", type=int, help="RNG seed (default: $CENSORED_LDP_SEED or built-in)")
    p.add_argument("--k-cap", type=int, default=K_MAX + 2, help="largest stratum simulated")
    p.add_argument("--workers", type=int, default=1, help="worker threads")


def _add_output(p: argparse.ArgumentParser, default: str) -> None:
    p.add_argument("--format", choices=("json", "csv"), default=default)
    p.add_argument("--output", help="write to this path instead of stdout")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--x", type=float, nargs="+", help="deviation level(s)")
    p.add_argument("--x-from", type=float)
    p.add_argument("--x-to", type=float)
    p.add_argument("--points", type=int, default=50)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="censored-ldp",
        description="Large-deviation approximations and Monte Carlo for censored heavy-tailed sums.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approx", help="evaluate the matching approximation at one x")
    _add_walk(p)
    p.add_argument("--x", type=float, required=True)
    _add_output(p, "json")

    p = sub.add_parser("sweep", help="approximations (and optional MC) over an x grid")
    _add_walk(p)
    _add_grid(p)
    p.add_argument("--with-mc", choices=("stratified", "plain"))
    _add_mc(p)
    _add_output(p, "csv")

    p = sub.add_parser("wk", help="evaluate W_k(z), its closed form and the simplex oracle")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--z", type=float, nargs="+", required=True)
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--oracle", action="store_true", help="also run the simplex Monte Carlo oracle")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int)
    _add_output(p, "json")

    p = sub.add_parser("simulate", help="Monte Carlo estimate of P(Y_n > x)")
    p.add_argument("method", choices=("stratified", "plain"))
    _add_walk(p)
    _add_grid(p)
    _add_mc(p)
    _add_output(p, "json")

    p = sub.add_parser("validate", help="run the numerical validation battery")
    p.add_argument("--quick", action="store_true", help="W-function checks only")
    p.add_argument("--alpha", type=float, default=3.0)
    p.add_argument("--n", type=int, default=10**4)
    p.add_argument("--M", type=float, default=3000.0)
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--oracle-samples", type=int, default=10**7)
    p.add_argument("--k-cap", type=int, default=4)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    return parser


# ---------------------------------------------------------------------------
# emitters


def _formula_row(config: WalkConfig, x: float, approx) -> dict:
    row = {"x": float(x), "x_over_M": float(x / config.M), "regime": str(approx.regime), "k": approx.k, "value": approx.value}
    for j, col in enumerate(TERM_COLUMNS):
        row[col] = approx.terms[j][1] if j < len(approx.terms) else None
    row["diagnostic"] = ";".join(f"{label}:{v!r}" for label, v in approx.diagnostics)
    return row


def _write_csv(out, meta: dict, columns: list[str], rows: list[dict]) -> None:
    for key, v in meta.items():
        out.write(f"# {key}={_cell(v)}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])


def _write_json(out, meta: dict, results: list[dict]) -> None:
    json.dump({"metadata": meta, "results": results}, out, indent=2, allow_nan=False)
    out.write("\n")


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _approx_json(config: WalkConfig, x: float, approx) -> dict:
    d = approx.as_dict()
    d = {"x": float(x), "x_over_M": float(x / config.M), **d}
    d["value"] = _num(d["value"])
    for item in d["terms"] + d["diagnostics"]:
        item["value"] = _num(item["value"])
    return d


# ---------------------------------------------------------------------------
# subcommands


def cmd_approx(args) -> int:
    if not args.x > 0:
        raise DomainError("x must be positive")
    config = _walk_from(args)
    approx = approx_auto(config, args.x, eps=args.eps, h=args.h)
    meta = _metadata(config, args)
    buf = io.StringIO()
    if args.format == "json":
        _write_json(buf, meta, [_approx_json(config, args.x, approx)])
    else:
        _write_csv(buf, meta, FORMULA_COLUMNS, [_formula_row(config, args.x, approx)])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _walk_from(args)
    xs = _x_grid(args)
    rows = [_formula_row(config, x, approx_auto(config, float(x), eps=args.eps, h=args.h)) for x in xs]
    columns = list(FORMULA_COLUMNS)
    mc = None
    if args.with_mc:
        mc = _mc_from(args)
        estimator = estimate_stratified if args.with_mc == "stratified" else estimate_plain
        for row, est in zip(rows, estimator(config, xs, mc)):
            row.update(mc_p=est.p_hat, mc_se=est.std_err, bias_bound=est.bias_bound)
        columns += MC_COLUMNS
    meta = _metadata(config, args, mc)
    buf = io.StringIO()
    if args.format == "csv":
        _write_csv(buf, meta, columns, rows)
    else:
        _write_json(buf, meta, [{c: (_num(r.get(c)) if isinstance(r.get(c), float) else r.get(c)) for c in columns} for r in rows])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_wk(args) -> int:
    seed = default_seed() if args.seed is None else args.seed
    rows = []
    for z in args.z:
        row = {"k": args.k, "z": z, "alpha": args.alpha, "value": W(args.k, z, args.alpha)}
        row["closed_form"] = {1: W1_closed, 2: W2_closed}[args.k](z, args.alpha) if args.k in (1, 2) else None
        if args.oracle:
            value, se, bias = oracle_W_simplex(args.k, z, args.alpha, samples=args.samples, seed=seed)
            row.update(oracle=value, oracle_se=se, oracle_bias_bound=bias)
        rows.append(row)
    meta = {"alpha": args.alpha, "k": args.k, "seed": seed if args.oracle else None, "oracle_samples": args.samples if args.oracle else None}
    buf = io.StringIO()
    if args.format == "csv":
        _write_csv(buf, meta, WK_COLUMNS, rows)
    else:
        _write_json(buf, meta, [{c: (_num(r.get(c)) if isinstance(r.get(c), float) else r.get(c)) for c in WK_COLUMNS} for r in rows])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = _walk_from(args)
    xs = _x_grid(args)
    mc = _mc_from(args)
    estimator = estimate_stratified if args.method == "stratified" else estimate_plain
    rows = []
    for est in estimator(config, xs, mc):
        rows.append(
            {
                "x": est.x,
                "x_over_M": est.x / config.M,
                "method": est.method,
                "p_hat": est.p_hat,
                "std_err": est.std_err,
                "rel_se": est.rel_se,
                "bias_bound": est.bias_bound,
                "y": est.y,
                "samples": est.samples,
            }
        )
    meta = _metadata(config, args, mc)
    buf = io.StringIO()
    if args.format == "csv":
        _write_csv(buf, meta, SIMULATE_COLUMNS, rows)
    else:
        _write_json(buf, meta, [{c: (_num(r[c]) if isinstance(r[c], float) else r[c]) for c in SIMULATE_COLUMNS} for r in rows])
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_validate(args) -> int:
    settings = SuiteSettings(
        n=args.n,
        M=args.M,
        alpha=args.alpha,
        samples=args.samples,
        k_cap=args.k_cap,
        oracle_samples=args.oracle_samples,
        seed=default_seed() if args.seed is None else args.seed,
        workers=args.workers,
    )
    config = settings.config()
    print(
        f"validation battery: n={config.n}, M={config.M!r}, alpha={config.alpha!r}, "
        f"M/s_n={config.censoring_ratio:.4g}, Pi_n={config.Pi_n:.4g}, samples={settings.samples}, seed={settings.seed}",
        flush=True,
    )
    results, warnings = run_suite(settings, quick=args.quick, report=lambda r: print(r.line(), flush=True))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    failed = [r for r in results if r.status == FAIL]
    print(f"{len(results) - len(failed)}/{len(results)} criteria not failing; {len(failed)} failed")
    return EXIT_CRITERION if failed else EXIT_OK


COMMANDS = {
    "approx": cmd_approx,
    "sweep": cmd_sweep,
    "wk": cmd_wk,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, RangeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: fit, eval, optimize, sweep, simulate, backtest.

Every command writes deterministic JSON (sorted keys) or CSV so reruns with
identical inputs and seeds are byte-identical. Figures are plotted from
these artifacts by external tooling; no images are emitted here.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import backtest as bt
from .bins import BinGrid
from .distribution import (
    DEFAULT_BIN_WIDTH_PCT,
    DEFAULT_K_MAX,
    NextPriceDistribution,
    fit_distribution,
    load_price_csv,
    percent_changes,
)
from .errors import InputError, LpresetError
from .markov import build_reset_chain, landing_over
from .optimizer import OptimizationProblem, solve
from .simulate import run_strategy, sample_path
from .strategies import (
    StrategySpec,
    optimal_strategy,
    proportional_strategy,
    uniform_strategy,
    window_for_mass,
)
from .utility import MODE_FULL, MODE_STRICT, UtilityParams, expected_utility

__all__ = ["main", "resolve_strategy"]


def _emit(text: str, out: str | None, quiet: bool) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    elif not quiet:
        sys.stdout.write(text)


def _emit_json(doc: dict, out: str | None, quiet: bool) -> None:
    _emit(json.dumps(doc, sort_keys=True, indent=2) + "\n", out, quiet)


def _params_from_args(args: argparse.Namespace) -> UtilityParams:
    return UtilityParams(a=args.a, kappa=args.kappa, ell=args.ell)


def resolve_strategy(doc: dict, dist: NextPriceDistribution) -> StrategySpec:
    """Turn a strategy document into a concrete spec.

    Documents either carry explicit ``weights`` or a constructor form
    (kind plus window parameters) resolved against the distribution.
    """
    params = UtilityParams.from_json_dict(doc.get("params", {}))
    if "weights" in doc:
        return StrategySpec.from_json_dict(doc)
    kind = doc.get("kind")
    if kind == "uniform":
        n_tau = _window_field(doc, dist, "n_tau", "tau_mass")
        n_alpha = _window_field(doc, dist, "n_alpha", "alpha_mass")
        return uniform_strategy(dist, n_tau, n_alpha, params)
    if kind == "proportional":
        return proportional_strategy(
            dist,
            params,
            tau_mass=doc.get("tau_mass"),
            alpha_mass=doc.get("alpha_mass"),
            n_tau=doc.get("n_tau"),
            n_alpha=doc.get("n_alpha"),
        )
    if kind == "optimal":
        n_tau = _window_field(doc, dist, "n_tau", "tau_mass")
        spec, _ = optimal_strategy(dist, n_tau, params)
        return spec
    raise InputError(f"cannot resolve strategy document (kind={kind!r}, no weights)")


def _window_field(
    doc: dict, dist: NextPriceDistribution, count_key: str, mass_key: str
) -> int:
    if count_key in doc:
        return int(doc[count_key])
    if mass_key in doc:
        return window_for_mass(dist, float(doc[mass_key]))
    raise InputError(f"strategy document needs {count_key} or {mass_key}")


def _load_strategy(path: str, dist: NextPriceDistribution) -> StrategySpec:
    with open(path) as fh:
        return resolve_strategy(json.load(fh), dist)


# ---------------------------------------------------------------- commands


def cmd_fit(args: argparse.Namespace) -> int:
    series = load_price_csv(args.prices)
    dist = fit_distribution(
        percent_changes(series),
        k_max=args.k_max,
        bin_width_pct=args.bin_width_pct,
        clamp_tails=args.clamp_tails,
    )
    _emit_json(dist.to_json_dict(), args.out, args.quiet)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    dist = NextPriceDistribution.load(args.distribution)
    spec = _load_strategy(args.strategy, dist)
    value = expected_utility(dist, spec.n_tau, spec.allocation, spec.params, args.mode)
    _emit_json(
        {
            "expected_utility": value,
            "mode": args.mode,
            "n_tau": spec.n_tau,
            "n_alpha": spec.n_alpha,
            "params": spec.params.to_json_dict(),
        },
        args.out,
        args.quiet,
    )
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    dist = NextPriceDistribution.load(args.distribution)
    params = _params_from_args(args)
    n_tau = (
        args.n_tau if args.n_tau is not None else window_for_mass(dist, args.tau_mass)
    )
    spec, solution = optimal_strategy(dist, n_tau, params, mode=args.mode)
    doc = solution.to_json_dict()
    doc.update(
        {"n_tau": spec.n_tau, "mode": args.mode, "params": params.to_json_dict()}
    )
    _emit_json(doc, args.out, args.quiet)
    return 0


def _sweep_cell(
    dist: NextPriceDistribution,
    strategy: str,
    n_tau: int,
    n_alpha: int,
    params: UtilityParams,
    mode: str,
) -> float:
    if strategy == "proportional":
        spec = proportional_strategy(dist, params, n_tau=n_tau, n_alpha=n_alpha)
    elif strategy == "uniform":
        spec = uniform_strategy(dist, n_tau, n_alpha, params)
    elif strategy == "optimal":
        spec, _ = optimal_strategy(dist, n_tau, params)
    else:
        raise InputError(f"unknown sweep strategy {strategy!r}")
    return expected_utility(dist, spec.n_tau, spec.allocation, spec.params, mode)


def cmd_sweep(args: argparse.Namespace) -> int:
    dist = NextPriceDistribution.load(args.distribution)
    params = _params_from_args(args)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["n_tau", "n_alpha", "expected_utility"])
    if args.tau_mass_grid:
        for mass in _parse_grid(args.tau_mass_grid, float):
            n_tau = window_for_mass(dist, mass)
            spec, _ = optimal_strategy(dist, n_tau, params)
            value = expected_utility(
                dist, spec.n_tau, spec.allocation, params, args.mode
            )
            writer.writerow([n_tau, spec.n_alpha, repr(value)])
    else:
        for n_tau in _parse_grid(args.n_tau_grid, int):
            for n_alpha in _parse_grid(args.n_alpha_grid, int):
                value = _sweep_cell(
                    dist, args.strategy, n_tau, n_alpha, params, args.mode
                )
                writer.writerow([n_tau, n_alpha, repr(value)])
    _emit(buf.getvalue(), args.out, args.quiet)
    return 0


def _parse_grid(raw: str | None, typ) -> list:
    if not raw:
        raise InputError("missing sweep grid specification")
    try:
        return [typ(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"bad grid {raw!r}") from exc


def cmd_simulate(args: argparse.Namespace) -> int:
    dist = NextPriceDistribution.load(args.distribution)
    spec = _load_strategy(args.strategy, dist)
    path = sample_path(dist, args.steps, args.seed)
    report = run_strategy(
        path, spec, mode=args.mode, seed=args.seed, trace_out=args.trace_out
    )
    _emit_json(report.to_json_dict(), args.out, args.quiet)
    return 0


def cmd_backtest(args: argparse.Namespace) -> int:
    series = load_price_csv(args.prices)
    step = args.bin_width_pct / 100.0
    lo, hi = float(series.prices.min()), float(series.prices.max())
    anchor = float(series.prices[0]) if args.grid_anchor == "first" else lo
    grid = BinGrid.from_price_range(lo, hi * (1.0 + step), step, anchor=anchor)
    # resolve the strategy against the distribution fitted from this series
    dist = fit_distribution(
        percent_changes(series), k_max=args.k_max, bin_width_pct=args.bin_width_pct
    )
    spec = _load_strategy(args.strategy, dist)
    report = bt.replay(
        series,
        spec,
        grid,
        mode=args.mode,
        collect_band=args.band_out is not None,
        compare_v2=args.compare_v2,
    )
    if args.band_out:
        report.write_band_csv(args.band_out)
    _emit_json(report.to_json_dict(), args.out, args.quiet)
    return 0


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--quiet", action="store_true", help="suppress stdout output")
    p.add_argument(
        "--mode",
        choices=[MODE_STRICT, MODE_FULL],
        default=MODE_STRICT,
        help="expected-utility evaluation mode",
    )


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--a", type=float, default=0.0, help="absolute risk aversion")
    p.add_argument("--kappa", type=float, default=1.0, help="fee yield per step")
    p.add_argument("--ell", type=float, default=100.0, help="total liquidity")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpreset",
        description="tau-reset liquidity provision: fit, analyze, optimize, validate",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the next-price distribution from a price CSV")
    p.add_argument("prices", help="CSV with header timestamp,price")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--bin-width-pct", type=float, default=DEFAULT_BIN_WIDTH_PCT)
    tails = p.add_mutually_exclusive_group()
    tails.add_argument("--clamp-tails", dest="clamp_tails", action="store_true")
    tails.add_argument("--drop-tails", dest="clamp_tails", action="store_false")
    p.set_defaults(clamp_tails=True, func=cmd_fit)
    _add_common(p)

    p = sub.add_parser("eval", help="expected utility of a strategy")
    p.add_argument("distribution")
    p.add_argument("strategy")
    p.set_defaults(func=cmd_eval)
    _add_common(p)

    p = sub.add_parser("optimize", help="solve for the optimal allocation")
    p.add_argument("distribution")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--n-tau", type=int)
    group.add_argument("--tau-mass", type=float)
    _add_params(p)
    p.set_defaults(func=cmd_optimize)
    _add_common(p)

    p = sub.add_parser("sweep", help="expected-utility sweep over window grids")
    p.add_argument("distribution")
    p.add_argument(
        "--strategy",
        choices=["proportional", "uniform", "optimal"],
        default="proportional",
    )
    p.add_argument("--n-tau-grid", help="comma-separated n_tau values")
    p.add_argument("--n-alpha-grid", help="comma-separated n_alpha values")
    p.add_argument(
        "--tau-mass-grid",
        help="comma-separated tau masses (optimal strategy per mass)",
    )
    _add_params(p)
    p.set_defaults(func=cmd_sweep)
    _add_common(p)

    p = sub.add_parser("simulate", help="Monte Carlo run of a strategy")
    p.add_argument("distribution")
    p.add_argument("strategy")
    p.add_argument("--steps", type=int, default=50_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", help="optional per-step CSV trace")
    p.set_defaults(func=cmd_simulate)
    _add_common(p)

    p = sub.add_parser("backtest", help="replay a price series against the v2 baseline")
    p.add_argument("prices")
    p.add_argument("strategy")
    p.add_argument("--grid-anchor", choices=["first", "low"], default="first")
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--bin-width-pct", type=float, default=DEFAULT_BIN_WIDTH_PCT)
    p.add_argument(
        "--compare-v2", dest="compare_v2", action="store_true", default=True
    )
    p.add_argument("--no-compare-v2", dest="compare_v2", action="store_false")
    p.add_argument("--band-out", help="optional band-trace CSV path")
    p.set_defaults(func=cmd_backtest)
    _add_common(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LpresetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

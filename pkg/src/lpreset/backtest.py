"""Historical replay of a tau-reset strategy and the Uniswap-v2 baseline.

The v2 baseline spreads liquidity uniformly over every bin of the grid, so it
earns kappa*ell/N every step and never resets. Note the comparison, exactly
like the baseline it mirrors, ignores impermanent loss and pool-share
dilution.

Ratio accounting: the strategy-vs-v2 ratio is computed on unshifted
utilities u(R). The +1 reward shift is a strategy-independent constant that
would dominate both sides of the quotient and wash the comparison out; on
reward-scale utilities the ratio is meaningful for every risk level.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .bins import BinGrid
from .distribution import PriceSeries
from .errors import InputError
from .strategies import StrategySpec
from .utility import MODE_FULL, UtilityParams, exp_utility

__all__ = ["BacktestReport", "replay", "v2_baseline", "compare"]


@dataclass(frozen=True)
class BacktestReport:
    steps: int
    resets: int
    mean_utility_per_step: float
    v2_mean_utility_per_step: float
    ratio: float
    grid_bins: int
    band_trace: list | None = None

    def to_json_dict(self) -> dict:
        return {
            "steps": int(self.steps),
            "resets": int(self.resets),
            "mean_utility_per_step": float(self.mean_utility_per_step),
            "v2_mean_utility_per_step": float(self.v2_mean_utility_per_step),
            "ratio": float(self.ratio),
            "grid_bins": int(self.grid_bins),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def write_band_csv(self, path: str) -> None:
        if self.band_trace is None:
            raise InputError("replay was run without band collection")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["step", "price", "alpha_low", "alpha_high", "tau_low", "tau_high"]
            )
            writer.writerows(self.band_trace)


def v2_baseline(
    series: PriceSeries,
    grid: BinGrid,
    params: UtilityParams,
    apply_shift: bool = True,
) -> float:
    """Guaranteed per-step utility of uniform liquidity over all N grid bins.

    With ``apply_shift`` the standard a != 0 shift convention is applied;
    replay() disables it on both sides of its ratio (see module docstring).
    """
    span_lo, span_hi = grid.covered_span()
    lo, hi = float(series.prices.min()), float(series.prices.max())
    if lo < span_lo or hi >= span_hi:
        raise InputError("grid does not span the series' full price range")
    shift = params.shift if apply_shift else 0.0
    return exp_utility(params.kappa * params.ell / grid.n_bins + shift, params)


def replay(
    series: PriceSeries,
    spec: StrategySpec,
    grid: BinGrid,
    mode: str = MODE_FULL,
    collect_band: bool = False,
    compare_v2: bool = True,
) -> BacktestReport:
    """Drive the tau-reset semantics with realized price moves.

    Multi-bin jumps are allowed; a jump beyond B_tau is a single reset at the
    fixed cost of 1, re-centering on the landing bin.
    """
    del mode
    params = spec.params
    alloc = spec.allocation
    scale = params.kappa * params.ell
    n_tau, n_alpha = spec.n_tau, spec.n_alpha

    bins = [grid.price_to_bin(float(p)) for p in series.prices]
    center = bins[0]
    resets = 0
    utilities = []
    band = [] if collect_band else None

    for t in range(1, len(bins)):
        j = bins[t] - center
        r = scale * alloc.weight(j)
        if abs(j) > n_tau:
            r -= 1.0
            resets += 1
            center = bins[t]
        utilities.append(exp_utility(r, params))
        if band is not None:
            # band edges may poke past the grid's covered span near the series
            # extremes, so compute them directly rather than via bin_bounds
            band.append(
                (
                    t,
                    float(series.prices[t]),
                    grid._edge(center - n_alpha),
                    grid._edge(center + n_alpha + 1),
                    grid._edge(center - n_tau),
                    grid._edge(center + n_tau + 1),
                )
            )

    mean = float(np.mean(utilities))
    v2_mean = (
        v2_baseline(series, grid, params, apply_shift=False) if compare_v2 else math.nan
    )
    ratio = mean / v2_mean if compare_v2 and v2_mean != 0.0 else math.nan
    return BacktestReport(
        steps=len(utilities),
        resets=resets,
        mean_utility_per_step=mean,
        v2_mean_utility_per_step=v2_mean,
        ratio=ratio,
        grid_bins=grid.n_bins,
        band_trace=band,
    )


def compare(report: BacktestReport) -> float:
    """Strategy-to-v2 mean utility ratio."""
    if not math.isfinite(report.v2_mean_utility_per_step):
        raise InputError("report has no v2 baseline (run replay with compare_v2)")
    if report.v2_mean_utility_per_step <= 0.0:
        raise InputError(
            f"v2 baseline utility {report.v2_mean_utility_per_step!r} is not positive; "
            "ratio comparison is undefined"
        )
    return report.mean_utility_per_step / report.v2_mean_utility_per_step

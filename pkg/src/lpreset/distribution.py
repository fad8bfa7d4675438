"""Historical price ingestion and the stationary next-price distribution h(k).

h(k) is the probability that the price moves k bins in one time step,
estimated as a normalized histogram of percent changes over 2*k_max+1 bins
of width ``bin_width_pct`` centered on zero.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime

import numpy as np

from .errors import InputError

__all__ = [
    "PriceSeries",
    "NextPriceDistribution",
    "load_price_csv",
    "percent_changes",
    "fit_distribution",
    "stability_correlation",
]

DEFAULT_K_MAX = 64
DEFAULT_BIN_WIDTH_PCT = 6.0 / 128.0  # 129 bins spanning [-3%, 3%]


@dataclass(frozen=True)
class PriceSeries:
    """Uniformly sampled price observations (timestamps in epoch seconds)."""

    timestamps: np.ndarray
    prices: np.ndarray

    def __post_init__(self) -> None:
        ts = np.asarray(self.timestamps, dtype=float)
        px = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "prices", px)
        if ts.shape != px.shape:
            raise InputError("timestamps and prices must have the same length")
        if len(px) < 2:
            raise InputError("need at least 2 price observations")
        if not np.all(np.diff(ts) > 0):
            raise InputError("timestamps must be strictly increasing")
        if not np.all(px > 0):
            raise InputError("prices must be strictly positive")

    def __len__(self) -> int:
        return len(self.prices)


@dataclass(frozen=True)
class NextPriceDistribution:
    """Binned percent-change law h(k) over relative offsets k in [-k_max, k_max]."""

    k_max: int
    probs: np.ndarray  # ordered from k = -k_max to +k_max
    bin_width_pct: float
    source_rows: int = 0

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        object.__setattr__(self, "probs", p)
        if self.k_max < 1:
            raise InputError(f"k_max must be >= 1, got {self.k_max}")
        if self.bin_width_pct <= 0:
            raise InputError("bin_width_pct must be > 0")
        if p.shape != (2 * self.k_max + 1,):
            raise InputError(
                f"probs must have length {2 * self.k_max + 1}, got {p.shape}"
            )
        if np.any(p < 0):
            raise InputError("probabilities must be non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InputError(f"probabilities must sum to 1, got {p.sum()!r}")

    def prob(self, k: int) -> float:
        """h(k); zero outside the support."""
        if abs(k) > self.k_max:
            return 0.0
        return float(self.probs[k + self.k_max])

    def prob_array(self, ks: np.ndarray) -> np.ndarray:
        """Vectorized h over arbitrary integer offsets (zero outside support)."""
        ks = np.asarray(ks)
        out = np.zeros(ks.shape, dtype=float)
        inside = np.abs(ks) <= self.k_max
        out[inside] = self.probs[ks[inside] + self.k_max]
        return out

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def to_json_dict(self) -> dict:
        return {
            "k_max": int(self.k_max),
            "bin_width_pct": float(self.bin_width_pct),
            "probs": [float(p) for p in self.probs],
            "source_rows": int(self.source_rows),
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "NextPriceDistribution":
        try:
            return cls(
                k_max=int(doc["k_max"]),
                probs=np.asarray(doc["probs"], dtype=float),
                bin_width_pct=float(doc["bin_width_pct"]),
                source_rows=int(doc.get("source_rows", 0)),
            )
        except KeyError as exc:
            raise InputError(f"distribution document missing field {exc}") from exc

    def save(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "NextPriceDistribution":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _parse_timestamp(raw: str) -> float:
    raw = raw.strip()
    try:
        return float(raw)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(raw).timestamp()
    except ValueError as exc:
        raise InputError(f"unparseable timestamp {raw!r}") from exc


def load_price_csv(path: str) -> PriceSeries:
    """Read a ``timestamp,price`` CSV (ISO-8601 or epoch-second timestamps)."""
    timestamps: list[float] = []
    prices: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"timestamp", "price"} <= set(
            reader.fieldnames
        ):
            raise InputError(f"{path}: expected header with 'timestamp,price'")
        for row in reader:
            timestamps.append(_parse_timestamp(row["timestamp"]))
            try:
                prices.append(float(row["price"]))
            except ValueError as exc:
                raise InputError(f"{path}: bad price {row['price']!r}") from exc
    if len(prices) < 2:
        raise InputError(f"{path}: need at least 2 rows")
    return PriceSeries(np.asarray(timestamps), np.asarray(prices))


def percent_changes(series: PriceSeries) -> np.ndarray:
    """Per-step percent change, 100 * (P_{n+1} - P_n) / P_n."""
    px = series.prices
    return 100.0 * np.diff(px) / px[:-1]


def fit_distribution(
    changes: np.ndarray,
    k_max: int = DEFAULT_K_MAX,
    bin_width_pct: float = DEFAULT_BIN_WIDTH_PCT,
    clamp_tails: bool = True,
) -> NextPriceDistribution:
    """Histogram percent changes into 2*k_max+1 bins centered on zero.

    Bin k covers [(k-0.5)*w, (k+0.5)*w); an edge value belongs to the higher
    bin. With ``clamp_tails`` the out-of-range mass folds into the edge bins,
    otherwise it is dropped before normalization.
    """
    changes = np.asarray(changes, dtype=float)
    if changes.size == 0:
        raise InputError("no percent changes to fit")
    if k_max < 1:
        raise InputError(f"k_max must be >= 1, got {k_max}")
    if bin_width_pct <= 0:
        raise InputError("bin_width_pct must be > 0")

    ks = np.floor(changes / bin_width_pct + 0.5).astype(int)
    if clamp_tails:
        ks = np.clip(ks, -k_max, k_max)
    else:
        ks = ks[np.abs(ks) <= k_max]
        if ks.size == 0:
            raise InputError("all samples fell outside the binned range")
    counts = np.bincount(ks + k_max, minlength=2 * k_max + 1).astype(float)
    return NextPriceDistribution(
        k_max=k_max,
        probs=counts / counts.sum(),
        bin_width_pct=bin_width_pct,
        source_rows=int(ks.size),
    )


def stability_correlation(
    d1: NextPriceDistribution, d2: NextPriceDistribution
) -> float:
    """Pearson correlation of two probability vectors (square for the r^2 diagnostic)."""
    if d1.k_max != d2.k_max or d1.bin_width_pct != d2.bin_width_pct:
        raise InputError("distributions must share k_max and bin width")
    x, y = d1.probs, d2.probs
    xc, yc = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise InputError("degenerate (constant) distribution has no correlation")
    return float(xc @ yc) / denom

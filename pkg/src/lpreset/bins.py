"""Geometric price-bin grid.

Bin i covers the half-open price interval
``[reference_price * (1+step)^i, reference_price * (1+step)^(i+1))``,
so equal-width bins in log-price correspond to equal percent moves and the
relative-offset price model is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RangeError

__all__ = ["BinGrid"]


@dataclass(frozen=True)
class BinGrid:
    """Immutable geometric grid mapping prices to integer bin indices.

    reference_price anchors bin 0; step is the fractional width per bin
    (e.g. 0.00046 for 0.046%); index_range is the inclusive (lowest, highest)
    absolute index covered.
    """

    reference_price: float
    step: float
    index_range: tuple[int, int]

    def __post_init__(self) -> None:
        if self.reference_price <= 0:
            raise RangeError(f"reference_price must be > 0, got {self.reference_price}")
        if self.step <= 0:
            raise RangeError(f"step must be > 0, got {self.step}")
        lo, hi = self.index_range
        if lo > hi:
            raise RangeError(f"index_range is empty: {self.index_range}")

    @classmethod
    def from_price_range(
        cls, low: float, high: float, step: float, anchor: float | None = None
    ) -> "BinGrid":
        """Build the smallest grid covering [low, high].

        ``anchor`` fixes the left edge of bin 0 (defaults to ``low``).
        """
        if low <= 0 or high < low:
            raise RangeError(f"invalid price range [{low}, {high}]")
        if anchor is None:
            anchor = low
        base = math.log1p(step)
        lo = math.floor(math.log(low / anchor) / base)
        hi = math.floor(math.log(high / anchor) / base)
        return cls(reference_price=anchor, step=step, index_range=(lo, hi))

    @property
    def n_bins(self) -> int:
        lo, hi = self.index_range
        return hi - lo + 1

    def covered_span(self) -> tuple[float, float]:
        """Price span [lower edge of first bin, upper edge of last bin)."""
        lo, hi = self.index_range
        return self.bin_bounds(lo)[0], self.bin_bounds(hi)[1]

    def bin_bounds(self, index: int) -> tuple[float, float]:
        """Half-open interval [l_i, r_i) of bin ``index``.

        Adjacent bins share an edge exactly: bin_bounds(i)[1] == bin_bounds(i+1)[0]
        under the same arithmetic.
        """
        lo, hi = self.index_range
        if index < lo or index > hi:
            raise RangeError(f"bin index {index} outside covered range [{lo}, {hi}]")
        return self._edge(index), self._edge(index + 1)

    def _edge(self, index: int) -> float:
        return self.reference_price * (1.0 + self.step) ** index

    def price_to_bin(self, price: float) -> int:
        """Index of the bin whose interval contains ``price``.

        A price exactly on an edge belongs to the higher bin. Results landing
        one index off due to floating-point rounding are corrected by checking
        the neighbouring intervals.
        """
        lo, hi = self.index_range
        span_lo, span_hi = self._edge(lo), self._edge(hi + 1)
        if price < span_lo or price >= span_hi:
            raise RangeError(
                f"price {price} outside covered span [{span_lo}, {span_hi})"
            )
        i = math.floor(math.log(price / self.reference_price) / math.log1p(self.step))
        # log arithmetic can land one bin off near an edge; re-check neighbours
        for cand in (i, i - 1, i + 1):
            if cand < lo or cand > hi:
                continue
            if self._edge(cand) <= price < self._edge(cand + 1):
                return cand
        raise RangeError(f"price {price} could not be located on the grid")

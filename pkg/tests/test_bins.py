import math

import pytest
from hypothesis import given, strategies as st

from lpreset import BinGrid, RangeError


def grid(ref=100.0, step=0.01, lo=-500, hi=500):
    return BinGrid(reference_price=ref, step=step, index_range=(lo, hi))


def loop_price_to_bin(ref, step, price):
    """Independent oracle: walk edges by repeated multiplication."""
    edge = ref
    if price >= ref:
        i = 0
        while edge * (1.0 + step) <= price:
            edge *= 1.0 + step
            i += 1
        return i
    i = 0
    while edge > price:
        edge /= 1.0 + step
        i -= 1
    return i


class TestPriceToBin:
    def test_left_edge_of_center_bin(self):
        assert grid().price_to_bin(100.0) == 0

    def test_edge_belongs_to_higher_bin(self):
        assert grid().price_to_bin(101.0) == 1

    def test_wide_range_matches_loop_oracle(self):
        g = BinGrid(reference_price=81.0, step=0.00046, index_range=(0, 6000))
        expected = loop_price_to_bin(81.0, 0.00046, 830.0)
        assert g.price_to_bin(830.0) == expected
        # consistent with discretizing [81, 830] into about 5500 bins
        assert 5000 < expected < 5500

    def test_out_of_range_price_raises_with_span(self):
        with pytest.raises(RangeError, match="outside covered span"):
            grid(lo=-5, hi=5).price_to_bin(200.0)


class TestBinBounds:
    def test_bin_zero(self):
        lo, hi = grid().bin_bounds(0)
        assert lo == 100.0
        assert hi == pytest.approx(101.0)

    def test_negative_index_adjacency(self):
        lo, hi = grid().bin_bounds(-1)
        assert lo == pytest.approx(100.0 / 1.01)
        assert hi == 100.0

    def test_repeated_multiplication_oracle(self):
        # oracle: 100 * 1.01 * 1.01 = 102.01, * 1.01 again = 103.0301
        lo, hi = grid().bin_bounds(2)
        assert lo == pytest.approx(102.01, abs=1e-9)
        assert hi == pytest.approx(103.0301, abs=1e-9)

    def test_index_outside_range_raises(self):
        with pytest.raises(RangeError):
            grid(lo=-5, hi=5).bin_bounds(6)

    def test_partition_edges_shared_exactly(self):
        g = grid(ref=81.0, step=0.00046, lo=-100, hi=100)
        for i in range(-100, 100):
            assert g.bin_bounds(i)[1] == g.bin_bounds(i + 1)[0]


@given(
    i=st.integers(min_value=-400, max_value=399),
    frac=st.floats(min_value=1e-6, max_value=1.0 - 1e-6),
)
def test_round_trip_inside_bin(i, frac):
    g = grid()
    lo, hi = g.bin_bounds(i)
    price = lo + frac * (hi - lo)
    if lo < price < hi:  # frac rounding can land exactly on an edge
        assert g.price_to_bin(price) == i


@given(st.lists(st.floats(min_value=1.0, max_value=10_000.0), min_size=2, max_size=20))
def test_monotone_in_price(prices):
    g = grid(lo=-2000, hi=2000)
    prices = sorted(prices)
    bins = [g.price_to_bin(p) for p in prices]
    assert bins == sorted(bins)


def test_from_price_range_covers_span():
    g = BinGrid.from_price_range(81.0, 830.0, 0.00046)
    span_lo, span_hi = g.covered_span()
    assert span_lo <= 81.0 and span_hi > 830.0
    assert g.price_to_bin(81.0) == 0
    assert 5000 < g.n_bins < 5600


def test_invalid_construction():
    with pytest.raises(RangeError):
        BinGrid(reference_price=-1.0, step=0.01, index_range=(0, 1))
    with pytest.raises(RangeError):
        BinGrid(reference_price=1.0, step=0.0, index_range=(0, 1))
    with pytest.raises(RangeError):
        BinGrid(reference_price=1.0, step=0.01, index_range=(3, 1))


def test_grid_anchor_alignment():
    anchored = BinGrid.from_price_range(90.0, 200.0, 0.01, anchor=100.0)
    assert anchored.price_to_bin(100.0) == 0
    assert anchored.price_to_bin(99.9) == -1


def test_jitter_correction_near_edges():
    g = grid(ref=math.pi, step=0.001, lo=-3000, hi=3000)
    for i in (-2500, -7, 0, 13, 2500):
        lo, hi = g.bin_bounds(i)
        assert g.price_to_bin(lo) == i
        assert g.price_to_bin(math.nextafter(hi, 0.0)) == i

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nnreach import CellBox, Interval, contains, hull, interval_split, make_partition
from nnreach.intervals import bounds_hull, split_points


def box(*pairs):
    return CellBox.from_pairs(pairs)


class TestInterval:
    def test_rejects_reversed(self):
        with pytest.raises(ValueError):
            Interval(1.0, 0.0)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_rejects_nonfinite(self, bad):
        with pytest.raises(ValueError):
            Interval(0.0, bad)
        with pytest.raises(ValueError):
            Interval(bad, 0.0)

    def test_degenerate_is_legal(self):
        iv = Interval(2.5, 2.5)
        assert iv.width == 0.0
        assert 2.5 in iv

    def test_immutable(self):
        iv = Interval(0, 1)
        with pytest.raises(AttributeError):
            iv.lo = 3


class TestSplit:
    def test_identity(self):
        assert interval_split(Interval(0, 1), 1) == [Interval(0, 1)]

    def test_halves(self):
        assert interval_split(Interval(0, 1), 2) == [Interval(0, 0.5), Interval(0.5, 1)]

    def test_twenty_segments(self):
        segs = interval_split(Interval(-1, 1), 20)
        assert len(segs) == 20
        assert segs[0].lo == -1.0 and segs[0].hi == pytest.approx(-0.9, abs=1e-15)
        assert segs[-1].lo == pytest.approx(0.9, abs=1e-15) and segs[-1].hi == 1.0
        assert all(s.width == pytest.approx(0.1, abs=1e-15) for s in segs)

    def test_zero_count(self):
        with pytest.raises(ValueError):
            interval_split(Interval(0, 1), 0)

    def test_non_integer_count(self):
        with pytest.raises(TypeError):
            interval_split(Interval(0, 1), 2.0)

    def test_degenerate_gives_copies(self):
        assert interval_split(Interval(3, 3), 4) == [Interval(3, 3)] * 4

    def test_nested_grids_share_points(self):
        coarse = split_points(-1.0, 1.0, 10)
        fine = split_points(-1.0, 1.0, 50)
        assert np.array_equal(coarse, fine[::5])

    def test_huge_span(self):
        pts = split_points(-1.7e308, 1.7e308, 4)
        assert np.all(np.isfinite(pts))
        assert pts[0] == -1.7e308 and pts[-1] == 1.7e308
        assert np.all(np.diff(pts) > 0)

    @settings(max_examples=300, deadline=None)
    @given(
        lo=st.floats(-1e6, 1e6, allow_nan=False),
        width=st.floats(0, 1e6, allow_nan=False),
        m=st.integers(1, 200),
    )
    def test_tiling(self, lo, width, m):
        iv = Interval(lo, lo + width)
        segs = interval_split(iv, m)
        assert len(segs) == m
        assert segs[0].lo == iv.lo
        assert segs[-1].hi == iv.hi
        for a, b in zip(segs, segs[1:]):
            assert a.hi == b.lo


class TestPartition:
    def test_six_cells(self):
        p = make_partition(box([0, 1], [0, 2]), [2, 3])
        assert len(p.cells) == 6
        first = p.cells[0]
        assert first.pairs() == [[0.0, 0.5], [0.0, pytest.approx(2 / 3, rel=1e-15)]]

    def test_row_major_order(self):
        p = make_partition(box([0, 1], [0, 2]), [2, 3])
        # last dimension varies fastest
        assert p.cells[1].pairs()[0] == [0.0, 0.5]
        assert p.cells[3].pairs()[0] == [0.5, 1.0]

    @pytest.mark.parametrize("m, n", [(20, 400), (10, 100)])
    def test_unit_ball_counts(self, unit_box, m, n):
        assert len(make_partition(unit_box, [m, m]).cells) == n

    def test_dimension_mismatch(self, unit_box):
        with pytest.raises(ValueError):
            make_partition(unit_box, [3])

    def test_cell_accessor_matches_list(self):
        p = make_partition(box([0, 1], [-2, 2], [5, 6]), [3, 2, 4])
        for i in (0, 7, 23):
            assert p.cell(i) == p.cells[i]
        with pytest.raises(IndexError):
            p.cell(24)

    def test_chunked_bounds_match(self):
        p = make_partition(box([0, 1], [-2, 2]), [7, 9])
        lo, hi = p.bounds()
        lo2 = np.vstack([p.bounds(a, a + 10)[0] for a in range(0, len(p), 10)])
        hi2 = np.vstack([p.bounds(a, a + 10)[1] for a in range(0, len(p), 10)])
        assert np.array_equal(lo, lo2) and np.array_equal(hi, hi2)

    @settings(max_examples=100, deadline=None)
    @given(counts=st.lists(st.integers(1, 12), min_size=1, max_size=4))
    def test_cardinality(self, counts):
        b = CellBox.from_pairs([[-1, 2]] * len(counts))
        p = make_partition(b, counts)
        lo, _ = p.bounds()
        assert len(p) == lo.shape[0] == math.prod(counts)

    def test_cardinality_at_budget(self):
        p = make_partition(box([0, 1], [0, 1]), [1000, 1000])
        lo, hi = p.bounds()
        assert lo.shape == (10**6, 2)

    @settings(max_examples=40, deadline=None)
    @given(
        data=st.data(),
        n=st.integers(1, 3),
    )
    def test_coverage_and_disjoint_interiors(self, data, n):
        lows = data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
        widths = data.draw(st.lists(st.floats(0.01, 10), min_size=n, max_size=n))
        counts = data.draw(st.lists(st.integers(1, 8), min_size=n, max_size=n))
        b = CellBox.from_bounds(lows, [a + w for a, w in zip(lows, widths)])
        lo, hi = make_partition(b, counts).bounds()
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        pts = rng.uniform(b.lo, b.hi, size=(10_000, n))
        inside = (lo[None] <= pts[:, None]) & (pts[:, None] <= hi[None])
        hits = inside.all(axis=2)
        assert hits.any(axis=1).all()
        strict = ((lo[None] < pts[:, None]) & (pts[:, None] < hi[None])).all(axis=2)
        assert (strict.sum(axis=1) <= 1).all()
        # volumes add up to the box volume
        assert np.prod(hi - lo, axis=1).sum() == pytest.approx(np.prod(b.hi - b.lo), rel=1e-9)


class TestHull:
    def test_identity(self):
        assert hull([box([0, 1])]) == box([0, 1])

    def test_two(self):
        assert hull([box([0, 1]), box([2, 3])]) == box([0, 3])

    def test_two_dims(self):
        assert hull([box([-0.2, 0.1], [0, 1]), box([0, 0.2], [0.5, 2])]) == box([-0.2, 0.2], [0, 2])

    def test_empty(self):
        with pytest.raises(ValueError):
            hull([])

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            hull([box([0, 1]), box([0, 1], [0, 1])])

    def test_bounds_hull_agrees(self):
        lo = np.array([[0.0, 1.0], [-1.0, 3.0]])
        hi = np.array([[2.0, 2.0], [0.0, 4.0]])
        boxes = [CellBox.from_bounds(a, b) for a, b in zip(lo, hi)]
        assert bounds_hull(lo, hi) == hull(boxes)

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(1, 4).flatmap(
            lambda n: st.lists(
                st.lists(
                    st.tuples(st.floats(-1e3, 1e3), st.floats(0, 1e3)), min_size=n, max_size=n
                ),
                min_size=1,
                max_size=8,
            )
        )
    )
    def test_soundness(self, spec):
        boxes = [CellBox.from_pairs([[a, a + w] for a, w in dims]) for dims in spec]
        h = hull(boxes)
        assert all(b.issubset(h) for b in boxes)


class TestContains:
    def test_inside(self):
        assert contains(box([0, 1]), 0.5)

    def test_boundary(self):
        assert contains(box([0, 1]), 1.0)

    def test_outside(self):
        assert not contains(box([0, 1], [0, 1]), (0.5, 1.1))

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            contains(box([0, 1]), (0.5, 0.5))

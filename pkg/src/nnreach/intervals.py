"""Closed intervals, axis-aligned boxes and uniform grid partitions.

Boxes are the only set representation in the package. All arithmetic is
plain IEEE-754 double precision with round-to-nearest; nothing is rounded
outward unless the caller asks for it through a ``widen_eps`` argument
further up the stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Interval",
    "CellBox",
    "Partition",
    "interval_split",
    "split_points",
    "make_partition",
    "hull",
    "bounds_hull",
    "contains",
]


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]`` with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval endpoints must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def issubset(self, other: Interval) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


@dataclass(frozen=True, slots=True)
class CellBox:
    """Axis-aligned box, the Cartesian product of ``dims``."""

    dims: tuple[Interval, ...]

    def __post_init__(self) -> None:
        dims = tuple(self.dims)
        if not dims:
            raise ValueError("a box needs at least one dimension")
        for iv in dims:
            if not isinstance(iv, Interval):
                raise TypeError(f"box dimensions must be Interval, got {type(iv).__name__}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_bounds(cls, lo: Iterable[float], hi: Iterable[float]) -> CellBox:
        lo, hi = list(lo), list(hi)
        if len(lo) != len(hi):
            raise ValueError(f"bound vectors differ in length: {len(lo)} vs {len(hi)}")
        return cls(tuple(Interval(a, b) for a, b in zip(lo, hi)))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> CellBox:
        dims = []
        for p in pairs:
            if len(p) != 2:
                raise ValueError(f"expected a [lo, hi] pair, got {list(p)!r}")
            dims.append(Interval(p[0], p[1]))
        return cls(tuple(dims))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def lo(self) -> np.ndarray:
        return np.array([iv.lo for iv in self.dims], dtype=np.float64)

    @property
    def hi(self) -> np.ndarray:
        return np.array([iv.hi for iv in self.dims], dtype=np.float64)

    def pairs(self) -> list[list[float]]:
        return [[iv.lo, iv.hi] for iv in self.dims]

    def issubset(self, other: CellBox) -> bool:
        _check_same_dim(self, other)
        return all(a.issubset(b) for a, b in zip(self.dims, other.dims))

    def product(self, other: CellBox) -> CellBox:
        """Cartesian product ``self x other`` (dimensions concatenated)."""
        return CellBox(self.dims + other.dims)

    def __len__(self) -> int:
        return len(self.dims)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.dims)

    def __getitem__(self, i: int) -> Interval:
        return self.dims[i]

    def __repr__(self) -> str:
        return " x ".join(repr(iv) for iv in self.dims)


def _check_same_dim(a: CellBox, b: CellBox) -> None:
    if a.ndim != b.ndim:
        raise ValueError(f"dimension mismatch: {a.ndim} vs {b.ndim}")


def split_points(lo: float, hi: float, m: int) -> np.ndarray:
    """Grid points ``v_0 = lo < ... < v_m = hi`` of a uniform ``m``-way split.

    Each interior point is ``lo + (hi - lo) * (j / m)`` evaluated directly
    (never by repeated addition). Computing the ratio ``j / m`` first makes
    coinciding points of two nested grids (say m=10 and m=50) bit-identical,
    so a refined partition is an exact refinement of the coarse one.
    """
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise TypeError(f"partition count must be an integer, got {m!r}")
    if m < 1:
        raise ValueError(f"partition count must be >= 1, got {m}")
    lo, hi = float(lo), float(hi)
    ratios = np.arange(m + 1, dtype=np.float64) / float(m)
    width = hi - lo
    if math.isfinite(width):
        pts = lo + width * ratios
    else:
        pts = lo * (1.0 - ratios) + hi * ratios
    np.clip(pts, lo, hi, out=pts)
    pts[0] = lo
    pts[-1] = hi
    return pts


def interval_split(iv: Interval, m: int) -> list[Interval]:
    """Split ``iv`` into ``m`` contiguous segments of equal width."""
    pts = split_points(iv.lo, iv.hi, m)
    return [Interval(pts[j], pts[j + 1]) for j in range(m)]


class Partition:
    """Uniform grid partition of a box.

    Cells are enumerated in row-major order over the per-dimension segment
    indices, i.e. the last dimension varies fastest. The cell list is built
    lazily; :meth:`bounds` gives the whole partition as two ``(N, n)`` arrays
    without creating per-cell objects.
    """

    def __init__(self, box: CellBox, counts: Sequence[int]):
        counts = tuple(int(c) for c in counts)
        if len(counts) != box.ndim:
            raise ValueError(
                f"need one partition count per dimension: box has {box.ndim}, got {len(counts)}"
            )
        self.box = box
        self.counts = counts
        self.edges = tuple(split_points(iv.lo, iv.hi, m) for iv, m in zip(box.dims, counts))
        self._cells: list[CellBox] | None = None

    def __len__(self) -> int:
        return math.prod(self.counts)

    def bounds(self, start: int = 0, stop: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Lower/upper corners of cells ``start:stop`` as ``(N, n)`` arrays."""
        total = len(self)
        stop = total if stop is None else min(stop, total)
        idx = np.arange(start, stop, dtype=np.int64)
        n = len(self.counts)
        lo = np.empty((idx.size, n), dtype=np.float64)
        hi = np.empty((idx.size, n), dtype=np.float64)
        rest = idx
        for d in range(n - 1, -1, -1):
            m = self.counts[d]
            j = rest % m
            rest = rest // m
            lo[:, d] = self.edges[d][j]
            hi[:, d] = self.edges[d][j + 1]
        return lo, hi

    @property
    def cells(self) -> list[CellBox]:
        if self._cells is None:
            lo, hi = self.bounds()
            self._cells = [CellBox.from_bounds(a, b) for a, b in zip(lo, hi)]
        return self._cells

    def cell(self, index: int) -> CellBox:
        lo, hi = self.bounds(index, index + 1)
        if lo.shape[0] != 1:
            raise IndexError(f"cell index {index} out of range for {len(self)} cells")
        return CellBox.from_bounds(lo[0], hi[0])

    def __iter__(self) -> Iterator[CellBox]:
        return iter(self.cells)


def make_partition(box: CellBox, counts: Sequence[int]) -> Partition:
    """Uniform grid partition of ``box`` with ``counts[i]`` segments along axis ``i``.

    Only box-shaped source sets are supported, so no cell can miss the
    source set and none is dropped. A non-box source set would filter cells
    here.
    """
    return Partition(box, counts)


def hull(boxes: Sequence[CellBox]) -> CellBox:
    """Smallest box containing every box in ``boxes``."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("hull of an empty collection is undefined")
    n = boxes[0].ndim
    for b in boxes[1:]:
        if b.ndim != n:
            raise ValueError(f"dimension mismatch in hull: {n} vs {b.ndim}")
    return CellBox(
        tuple(
            Interval(min(b.dims[i].lo for b in boxes), max(b.dims[i].hi for b in boxes))
            for i in range(n)
        )
    )


def bounds_hull(lo: np.ndarray, hi: np.ndarray) -> CellBox:
    """Hull of boxes stored row-wise in ``lo``/``hi`` arrays."""
    if lo.shape[0] == 0:
        raise ValueError("hull of an empty collection is undefined")
    return CellBox.from_bounds(lo.min(axis=0), hi.max(axis=0))


def contains(box: CellBox, point: Sequence[float] | float) -> bool:
    """Closed membership test ``lo_i <= p_i <= hi_i`` for all ``i``."""
    p = np.atleast_1d(np.asarray(point, dtype=np.float64))
    if p.ndim != 1 or p.shape[0] != box.ndim:
        raise ValueError(f"point has dimension {p.shape}, box has {box.ndim}")
    return all(iv.lo <= x <= iv.hi for iv, x in zip(box.dims, p))

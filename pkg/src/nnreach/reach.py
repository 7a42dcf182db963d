"""Output-set over-approximation for MLPs by grid partitioning.

Per layer, a box of inputs is mapped to the box spanned by the exact
per-neuron minimum and maximum of the preactivation (weight-sign split),
pushed through the monotone activation. Partitioning the input box into
cells and propagating each cell separately tightens the union of the
resulting output boxes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .intervals import CellBox, Partition, bounds_hull, make_partition
from .network import Layer, Network

__all__ = [
    "DEFAULT_MAX_CELLS",
    "CellBudgetError",
    "MlpReachResult",
    "layer_bound",
    "layer_bounds_batch",
    "propagate_boxes",
    "reach_mlp",
]

DEFAULT_MAX_CELLS = 10**6
CHUNK = 1 << 15


class CellBudgetError(RuntimeError):
    """Partition would exceed the configured cell budget."""


def layer_bounds_batch(
    layer: Layer, lo: np.ndarray, hi: np.ndarray, widen_eps: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Output boxes of ``layer`` for a batch of input boxes, shape ``(N, n_in)``.

    Products are summed left to right in the same order as
    :func:`nnreach.network.affine`, so the bound dominates the computed
    forward pass of any point in the box, not just the real-valued one.
    """
    w = layer.weights
    z_lo = z_hi = None
    for j in range(w.shape[1]):
        col = w[:, j]
        a = lo[:, j : j + 1] * col
        b = hi[:, j : j + 1] * col
        pos = col >= 0
        g_lo = np.where(pos, a, b)
        g_hi = np.where(pos, b, a)
        if z_lo is None:
            z_lo, z_hi = g_lo, g_hi
        else:
            z_lo = z_lo + g_lo
            z_hi = z_hi + g_hi
    out_lo = layer.act(z_lo + layer.bias)
    out_hi = layer.act(z_hi + layer.bias)
    if widen_eps:
        out_lo = out_lo - widen_eps
        out_hi = out_hi + widen_eps
    return out_lo, out_hi


def layer_bound(layer: Layer, in_box: CellBox, widen_eps: float = 0.0) -> CellBox:
    """Box enclosing ``h(W v + b)`` for all ``v`` in ``in_box``.

    Each output interval is the exact range of that neuron over the box;
    conservatism only appears when layers are composed.
    """
    if in_box.ndim != layer.n_in:
        raise ValueError(f"layer takes {layer.n_in} inputs, box has {in_box.ndim} dimensions")
    lo, hi = layer_bounds_batch(layer, in_box.lo[None, :], in_box.hi[None, :], widen_eps)
    return CellBox.from_bounds(lo[0], hi[0])


def _fold(net: Network, lo: np.ndarray, hi: np.ndarray, widen_eps: float) -> tuple[np.ndarray, np.ndarray]:
    for layer in net.layers:
        lo, hi = layer_bounds_batch(layer, lo, hi, widen_eps)
    return lo, hi


def propagate_boxes(
    net: Network,
    lo: np.ndarray,
    hi: np.ndarray,
    *,
    widen_eps: float = 0.0,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Fold :func:`layer_bounds_batch` through every layer for each input box.

    Rows are processed in fixed-size chunks, optionally on a thread pool.
    Rows never interact, so the result does not depend on ``threads``.
    """
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if lo.ndim != 2 or lo.shape != hi.shape or lo.shape[1] != net.input_dim:
        raise ValueError(f"expected (N, {net.input_dim}) bound arrays, got {lo.shape} and {hi.shape}")
    n = lo.shape[0]
    starts = range(0, n, CHUNK)
    if threads <= 1 or n <= CHUNK:
        parts = [_fold(net, lo[s : s + CHUNK], hi[s : s + CHUNK], widen_eps) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: _fold(net, lo[s : s + CHUNK], hi[s : s + CHUNK], widen_eps), starts))
    if not parts:
        empty = np.empty((0, net.output_dim))
        return empty, empty.copy()
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


@dataclass(frozen=True, eq=False)
class MlpReachResult:
    """One output box per input cell (row-major cell order) and their hull."""

    lower: np.ndarray
    upper: np.ndarray
    partition: Partition

    def __post_init__(self) -> None:
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    def __len__(self) -> int:
        return self.lower.shape[0]

    @property
    def tubes(self) -> list[CellBox]:
        return [CellBox.from_bounds(a, b) for a, b in zip(self.lower, self.upper)]

    @property
    def hull(self) -> CellBox:
        return bounds_hull(self.lower, self.upper)

    def contains(self, point: Sequence[float]) -> bool:
        """Whether ``point`` lies in at least one tube."""
        p = np.asarray(point, dtype=np.float64)
        return bool(np.any(np.all((self.lower <= p) & (p <= self.upper), axis=1)))


def check_budget(counts: Sequence[int], max_cells: int | None) -> int:
    total = math.prod(int(c) for c in counts)
    if max_cells is not None and total > max_cells:
        raise CellBudgetError(
            f"partition {'x'.join(str(c) for c in counts)} has {total} cells, "
            f"over the budget of {max_cells}; raise max_cells to allow it"
        )
    return total


def reach_mlp(
    net: Network,
    input_box: CellBox,
    counts: Sequence[int],
    *,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    widen_eps: float = 0.0,
    threads: int = 1,
) -> MlpReachResult:
    """Partition ``input_box`` and bound the network output on every cell.

    Only the input space is partitioned; each cell travels through all
    layers as a single box. Pass ``max_cells=None`` to lift the budget.
    """
    if input_box.ndim != net.input_dim:
        raise ValueError(f"network takes {net.input_dim} inputs, box has {input_box.ndim} dimensions")
    if len(counts) != input_box.ndim:
        raise ValueError(f"need {input_box.ndim} partition counts, got {len(counts)}")
    check_budget(counts, max_cells)
    part = make_partition(input_box, counts)
    lo, hi = part.bounds()
    out_lo, out_hi = propagate_boxes(net, lo, hi, widen_eps=widen_eps, threads=threads)
    return MlpReachResult(out_lo, out_hi, part)

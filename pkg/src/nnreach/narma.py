"""Finite-horizon reachable-set estimation for NARMA network models.

For ``k > d_x`` the set at step ``k`` is bounded by running the MLP
reachability on the product of the previous ``d_x + 1`` state sets (newest
first) and ``d_u + 1`` copies of the input set. Taking a Cartesian product
of lagged sets drops the correlation between successive states, which is
an inherent source of conservatism of this scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .intervals import CellBox, bounds_hull, make_partition
from .network import NarmaModel
from .reach import DEFAULT_MAX_CELLS, check_budget, propagate_boxes

if TYPE_CHECKING:
    from .io import Scenario

__all__ = ["StepSet", "ReachTube", "reach_narma", "reach_interval_union"]

_RESTRICT_ELEMS = 1 << 22


@dataclass(frozen=True, eq=False)
class StepSet:
    """Boxes (rows of ``lower``/``upper``) whose union bounds one step's states."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        if self.lower.ndim != 2 or self.lower.shape != self.upper.shape or self.lower.shape[0] == 0:
            raise ValueError("step sets need matching nonempty (N, n) bound arrays")
        self.lower.setflags(write=False)
        self.upper.setflags(write=False)

    @classmethod
    def from_box(cls, box: CellBox) -> StepSet:
        return cls(box.lo[None, :], box.hi[None, :])

    @property
    def boxes(self) -> list[CellBox]:
        return [CellBox.from_bounds(a, b) for a, b in zip(self.lower, self.upper)]

    @property
    def hull(self) -> CellBox:
        return bounds_hull(self.lower, self.upper)

    def __len__(self) -> int:
        return self.lower.shape[0]

    def contains(self, point: Sequence[float]) -> bool:
        p = np.atleast_1d(np.asarray(point, dtype=np.float64))
        return bool(np.any(np.all((self.lower <= p) & (p <= self.upper), axis=1)))


@dataclass(frozen=True)
class ReachTube:
    """Per-step state sets for ``k = 0 .. len(steps) - 1``."""

    steps: tuple[StepSet, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("a reach tube needs at least one step")
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __getitem__(self, k: int) -> StepSet:
        return self.steps[k]

    @property
    def hulls(self) -> list[CellBox]:
        return [s.hull for s in self.steps]


def reach_interval_union(tube: ReachTube) -> CellBox:
    """Interval envelope of the reachable set over the whole horizon."""
    lo = np.min([s.lower.min(axis=0) for s in tube.steps], axis=0)
    hi = np.max([s.upper.max(axis=0) for s in tube.steps], axis=0)
    return CellBox.from_bounds(lo, hi)


def _carried(s: StepSet, max_boxes: int | None) -> StepSet:
    if max_boxes is None or len(s) > max_boxes:
        return StepSet(s.lower.min(axis=0, keepdims=True), s.upper.max(axis=0, keepdims=True))
    return s


def _slot_layout(model: NarmaModel) -> list[slice]:
    n, m = model.state_dim, model.input_dim
    slots = [slice(i * n, (i + 1) * n) for i in range(model.d_x + 1)]
    base = n * (model.d_x + 1)
    slots += [slice(base + i * m, base + (i + 1) * m) for i in range(model.d_u + 1)]
    return slots


def _restrict(
    cell_lo: np.ndarray, cell_hi: np.ndarray, sets: Sequence[StepSet], slots: Sequence[slice]
) -> tuple[np.ndarray, np.ndarray]:
    """Clip grid cells to a product of box unions, dropping cells that miss it.

    In each slot the cell is replaced by the hull of its intersections with
    the boxes of that slot's union; a cell missing every box of some slot
    does not meet the input set at all and is removed.
    """
    keep = np.ones(cell_lo.shape[0], dtype=bool)
    lo, hi = cell_lo.copy(), cell_hi.copy()
    for s, sl in zip(sets, slots):
        if len(s) == 1:
            continue
        step = max(1, _RESTRICT_ELEMS // (len(s) * s.lower.shape[1]))
        for a in range(0, cell_lo.shape[0], step):
            rows = slice(a, a + step)
            i_lo = np.maximum(cell_lo[rows, None, sl], s.lower[None, :, :])
            i_hi = np.minimum(cell_hi[rows, None, sl], s.upper[None, :, :])
            meets = np.all(i_lo <= i_hi, axis=2)
            keep[rows] &= meets.any(axis=1)
            lo[rows, sl] = np.where(meets[:, :, None], i_lo, np.inf).min(axis=1)
            hi[rows, sl] = np.where(meets[:, :, None], i_hi, -np.inf).max(axis=1)
    return lo[keep], hi[keep]


def reach_narma(
    model: NarmaModel,
    scenario: Scenario,
    *,
    max_cells: int | None = DEFAULT_MAX_CELLS,
    widen_eps: float = 0.0,
    threads: int = 1,
) -> ReachTube:
    """Bound the states of ``model`` over steps ``0 .. scenario.horizon``.

    Steps ``0 .. d_x`` are the initial sets themselves. When the horizon
    does not exceed ``d_x`` only those are returned.

    In hull mode every step enters the next MLP query as its interval hull.
    In union mode the per-cell boxes are kept (up to ``max_boxes``) and the
    grid over the hull of the input set is clipped to their union, so no
    cell is ever larger than the corresponding hull-mode cell.
    """
    scenario.validate(model)
    counts = scenario.partition_counts
    check_budget(counts, max_cells)
    mode = scenario.step_mode
    max_boxes = mode.max_boxes if mode.kind == "union" else None

    steps = [StepSet.from_box(b) for b in scenario.initial_sets]
    carried = [_carried(s, max_boxes) for s in steps]
    u_set = StepSet.from_box(scenario.input_set)
    slots = _slot_layout(model)

    for k in range(model.d_x + 1, scenario.horizon + 1):
        states = [carried[k - 1 - i] for i in range(model.d_x + 1)]
        sets = states + [u_set] * (model.d_u + 1)
        box = CellBox(tuple(iv for s in sets for iv in s.hull.dims))
        lo, hi = make_partition(box, counts).bounds()
        if max_boxes is not None:
            lo, hi = _restrict(lo, hi, sets, slots)
        out_lo, out_hi = propagate_boxes(model.net, lo, hi, widen_eps=widen_eps, threads=threads)
        step = StepSet(out_lo, out_hi)
        steps.append(step)
        carried.append(_carried(step, max_boxes))

    return ReachTube(tuple(steps))

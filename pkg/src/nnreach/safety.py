"""Half-space safety specifications and SAFE / UNCERTAIN verdicts.

A box misses the unsafe complement of a convex polyhedron exactly when it
lies inside it, and for a half-space ``a.x <= b`` that reduces to checking
the box corner that maximises ``a.x``. A reachable-set estimate that lies
entirely inside the safe set proves safety; anything else proves nothing,
hence UNCERTAIN rather than UNSAFE.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .intervals import CellBox
from .narma import ReachTube, reach_narma
from .network import NarmaModel

if TYPE_CHECKING:
    from .io import Scenario

__all__ = [
    "HalfSpace",
    "SafetySpec",
    "VerdictTag",
    "Witness",
    "Verdict",
    "box_satisfies",
    "first_violation",
    "verify_tube",
    "verify_narma",
]


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """The closed half-space ``{x : a . x <= b}``."""

    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=np.float64, copy=True).reshape(-1)
        if a.size == 0 or not np.all(np.isfinite(a)) or not np.isfinite(self.b):
            raise ValueError("half-space needs a nonempty finite normal and a finite offset")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.a.size

    def max_over(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """Maximum of ``a . x`` over each box (rows of ``lo``/``hi``), summed left to right."""
        total = None
        for i, ai in enumerate(self.a):
            term = ai * (hi[..., i] if ai >= 0 else lo[..., i])
            total = term if total is None else total + term
        return total

    def value(self, x: np.ndarray) -> np.ndarray:
        total = None
        for i, ai in enumerate(self.a):
            term = ai * x[..., i]
            total = term if total is None else total + term
        return total

    def __repr__(self) -> str:
        return f"HalfSpace(a={self.a.tolist()}, b={self.b!r})"


@dataclass(frozen=True)
class SafetySpec:
    """Conjunction of half-spaces; an empty conjunction is the whole space.

    Build the whole-space spec through :meth:`whole_space` so that an empty
    constraint list is always deliberate.
    """

    constraints: tuple[HalfSpace, ...]
    _whole: bool = False

    def __post_init__(self) -> None:
        cons = tuple(self.constraints)
        object.__setattr__(self, "constraints", cons)
        if not cons and not self._whole:
            raise ValueError("a safety spec needs at least one constraint (or use SafetySpec.whole_space())")
        if cons and self._whole:
            raise ValueError("whole-space spec cannot carry constraints")
        if len({c.dim for c in cons}) > 1:
            raise ValueError("all constraints must have the same dimension")

    @classmethod
    def whole_space(cls) -> SafetySpec:
        return cls((), _whole=True)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[float], float]]) -> SafetySpec:
        return cls(tuple(HalfSpace(a, b) for a, b in rows))

    @property
    def is_whole_space(self) -> bool:
        return self._whole

    @property
    def dim(self) -> int | None:
        return self.constraints[0].dim if self.constraints else None

    def check_dim(self, n: int) -> None:
        if self.dim is not None and self.dim != n:
            raise ValueError(f"safety constraints have dimension {self.dim}, boxes have {n}")

    def holds_at(self, x: Sequence[float]) -> bool:
        p = np.atleast_1d(np.asarray(x, dtype=np.float64))
        self.check_dim(p.shape[0])
        return all(c.value(p) <= c.b for c in self.constraints)


class VerdictTag(enum.Enum):
    SAFE = "SAFE"
    UNCERTAIN = "UNCERTAIN"


@dataclass(frozen=True)
class Witness:
    """First box (in step, then box order) found outside the safe set."""

    step: int
    box_index: int
    constraint_index: int


@dataclass(frozen=True)
class Verdict:
    tag: VerdictTag
    witness: Witness | None = None

    def __post_init__(self) -> None:
        if (self.tag is VerdictTag.SAFE) != (self.witness is None):
            raise ValueError("SAFE carries no witness and UNCERTAIN carries exactly one")

    @property
    def safe(self) -> bool:
        return self.tag is VerdictTag.SAFE

    def __str__(self) -> str:
        if self.witness is None:
            return self.tag.value
        w = self.witness
        return f"{self.tag.value} k={w.step} box={w.box_index} constraint={w.constraint_index}"


def box_satisfies(box: CellBox, spec: SafetySpec) -> bool:
    """Whether ``box`` lies entirely inside the safe set."""
    spec.check_dim(box.ndim)
    return first_violation(box.lo[None, :], box.hi[None, :], spec) is None


def first_violation(lo: np.ndarray, hi: np.ndarray, spec: SafetySpec) -> tuple[int, int] | None:
    """``(box_index, constraint_index)`` of the first box leaving the safe set, if any."""
    spec.check_dim(lo.shape[1])
    bad = np.zeros((lo.shape[0], len(spec.constraints)), dtype=bool)
    for c, hs in enumerate(spec.constraints):
        bad[:, c] = hs.max_over(lo, hi) > hs.b
    rows = np.flatnonzero(bad.any(axis=1))
    if rows.size == 0:
        return None
    r = int(rows[0])
    return r, int(np.flatnonzero(bad[r])[0])


def verify_tube(tube: ReachTube, spec: SafetySpec) -> Verdict:
    for k, step in enumerate(tube.steps):
        hit = first_violation(step.lower, step.upper, spec)
        if hit is not None:
            return Verdict(VerdictTag.UNCERTAIN, Witness(k, *hit))
    return Verdict(VerdictTag.SAFE)


def verify_narma(
    model: NarmaModel, scenario: Scenario, spec: SafetySpec | None = None, **reach_kwargs
) -> Verdict:
    """Estimate the reachable set and check it against ``spec``.

    ``spec`` defaults to the scenario's own safety spec. Extra keyword
    arguments go to :func:`nnreach.narma.reach_narma`.
    """
    if spec is None:
        spec = scenario.safety
    if spec is None:
        raise ValueError("no safety specification given and the scenario has none")
    spec.check_dim(model.state_dim)
    return verify_tube(reach_narma(model, scenario, **reach_kwargs), spec)

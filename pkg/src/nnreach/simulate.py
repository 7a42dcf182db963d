"""Monte Carlo trajectories of NARMA models and containment checks.

Random numbers come from numpy's PCG64 generator. Trajectory ``i`` of a
run with seed ``s`` draws from its own substream
``SeedSequence(s, spawn_key=(i,))``, so a trajectory does not depend on how
many others are drawn alongside it. Within a substream the initial states
are drawn first (``X_0`` first), then one input per step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .intervals import CellBox
from .narma import ReachTube
from .network import NarmaModel, forward
from .reach import MlpReachResult

if TYPE_CHECKING:
    from .io import Scenario

__all__ = [
    "Trajectory",
    "Violation",
    "ContainmentReport",
    "sample_trajectories",
    "sample_box",
    "check_containment",
    "check_output_containment",
    "write_trajectories_csv",
]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """States ``x(0..k_f)`` (rows) and the inputs ``u(0..k_f-1)`` that drove them."""

    states: np.ndarray
    inputs: np.ndarray
    seed: int
    index: int = 0

    def __len__(self) -> int:
        return self.states.shape[0]


def _uniform(rng: np.random.Generator, box: CellBox) -> np.ndarray:
    lo, hi = box.lo, box.hi
    return np.clip(rng.uniform(lo, hi), lo, hi)


def sample_box(box: CellBox, count: int, seed: int) -> np.ndarray:
    """``count`` points drawn uniformly from ``box``, one per row."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    lo, hi = box.lo, box.hi
    return np.clip(rng.uniform(lo, hi, size=(count, box.ndim)), lo, hi)


def sample_trajectories(model: NarmaModel, scenario: Scenario, count: int, seed: int) -> list[Trajectory]:
    """Simulate ``count`` trajectories with fresh i.i.d. uniform inputs at every step.

    Trajectories have as many steps as :func:`nnreach.narma.reach_narma`
    returns for the same scenario.
    """
    if isinstance(count, bool) or int(count) < 1:
        raise ValueError(f"count must be a positive integer, got {count!r}")
    scenario.validate(model)
    d_x, d_u = model.d_x, model.d_u
    n_steps = max(scenario.horizon, d_x) + 1
    n_inputs = n_steps - 1

    states = np.empty((count, n_steps, model.state_dim))
    inputs = np.empty((count, n_inputs, model.input_dim))
    for i in range(count):
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i,))))
        for k, box in enumerate(scenario.initial_sets):
            states[i, k] = _uniform(rng, box)
        for k in range(n_inputs):
            inputs[i, k] = _uniform(rng, scenario.input_set)

    for k in range(d_x, n_steps - 1):
        parts = [states[:, k - j] for j in range(d_x + 1)] + [inputs[:, k - j] for j in range(d_u + 1)]
        states[:, k + 1] = forward(model.net, np.concatenate(parts, axis=1))

    return [Trajectory(states[i].copy(), inputs[i].copy(), seed, i) for i in range(count)]


@dataclass(frozen=True)
class Violation:
    trajectory: int
    step: int
    state: tuple[float, ...]


@dataclass(frozen=True)
class ContainmentReport:
    trajectories: int
    points: int
    violations: int
    first: Violation | None

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        out = {"trajectories": self.trajectories, "points": self.points, "violations": self.violations}
        if self.first is not None:
            out["first_violation"] = {
                "trajectory": self.first.trajectory,
                "step": self.first.step,
                "state": list(self.first.state),
            }
        return out


def check_containment(tube: ReachTube, trajs: Sequence[Trajectory]) -> ContainmentReport:
    """Check every state of every trajectory against the union of boxes at its step."""
    points = violations = 0
    first = None
    for t, traj in enumerate(trajs):
        if len(traj) > len(tube):
            raise ValueError(f"trajectory {t} has {len(traj)} steps, tube only {len(tube)}")
        for k, x in enumerate(traj.states):
            step = tube[k]
            if x.shape[0] != step.lower.shape[1]:
                raise ValueError(f"state dimension {x.shape[0]} does not match tube dimension")
            points += 1
            if not step.contains(x):
                violations += 1
                if first is None:
                    first = Violation(t, k, tuple(float(v) for v in x))
    return ContainmentReport(len(trajs), points, violations, first)


def check_output_containment(result: MlpReachResult, outputs: np.ndarray) -> ContainmentReport:
    """Check network outputs (one per row) against the union of MLP tubes.

    Each row counts as a one-step trajectory in the report.
    """
    outputs = np.asarray(outputs, dtype=np.float64)
    inside = np.all(
        (result.lower[None, :, :] <= outputs[:, None, :]) & (outputs[:, None, :] <= result.upper[None, :, :]),
        axis=2,
    ).any(axis=1)
    bad = np.flatnonzero(~inside)
    first = None
    if bad.size:
        r = int(bad[0])
        first = Violation(r, 0, tuple(float(v) for v in outputs[r]))
    return ContainmentReport(outputs.shape[0], outputs.shape[0], int(bad.size), first)


def write_trajectories_csv(trajs: Sequence[Trajectory], path: str | Path) -> None:
    """Long format: ``trajectory, k, dim, value``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trajectory", "k", "dim", "value"])
        for t, traj in enumerate(trajs):
            for k, x in enumerate(traj.states):
                for d, v in enumerate(x):
                    w.writerow([t, k, d, repr(float(v))])

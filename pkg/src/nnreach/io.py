"""JSON file formats for networks, NARMA models and scenarios.

Network file::

    {"layers": [{"weights": [[...], ...], "bias": [...], "activation": "tanh"}, ...]}

A NARMA model file is a network file with the extra keys ``state_dim``,
``input_dim``, ``d_x`` and ``d_u``.

Scenario file::

    {"initial_sets": [[[lo, hi], ...], ...],   # one box per lag slot, X_0 first
     "input_set": [[lo, hi], ...],
     "horizon": 50,
     "partition_counts": [10, 10],
     "step_mode": "hull" | {"union": {"max_boxes": 500}},
     "safety": [{"a": [...], "b": 16.0}, ...] | "whole_space"}   # optional

Floats are written with ``repr`` (shortest round-trip form), so saving and
reloading reproduces every weight bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .intervals import CellBox
from .network import Layer, NarmaModel, Network
from .safety import HalfSpace, SafetySpec

__all__ = [
    "FileFormatError",
    "StepMode",
    "Scenario",
    "load_network",
    "save_network",
    "load_narma",
    "save_narma",
    "load_scenario",
    "save_scenario",
    "network_to_dict",
    "network_from_dict",
    "scenario_from_dict",
    "scenario_to_dict",
    "fixture_path",
]

FIXTURES = ("example1_mlp", "example2_narma", "maglev_narma")


class FileFormatError(ValueError):
    """A model or scenario file is malformed or inconsistent."""


@dataclass(frozen=True)
class StepMode:
    """How reachable sets are fed back between NARMA steps.

    ``hull``: each step's boxes are replaced by their interval hull.
    ``union``: the per-cell boxes are carried forward as long as there are
    at most ``max_boxes`` of them, otherwise they are hulled.
    """

    kind: str = "hull"
    max_boxes: int | None = None

    def __post_init__(self) -> None:
        if self.kind == "hull":
            if self.max_boxes is not None:
                raise ValueError("max_boxes only applies to union mode")
        elif self.kind == "union":
            if self.max_boxes is None or int(self.max_boxes) < 1:
                raise ValueError("union mode needs a positive max_boxes")
        else:
            raise ValueError(f"step mode must be 'hull' or 'union', got {self.kind!r}")

    @classmethod
    def hull(cls) -> StepMode:
        return cls("hull")

    @classmethod
    def union(cls, max_boxes: int) -> StepMode:
        return cls("union", int(max_boxes))


@dataclass(frozen=True)
class Scenario:
    initial_sets: tuple[CellBox, ...]
    input_set: CellBox
    horizon: int
    partition_counts: tuple[int, ...]
    step_mode: StepMode = field(default_factory=StepMode.hull)
    safety: SafetySpec | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "initial_sets", tuple(self.initial_sets))
        object.__setattr__(self, "partition_counts", tuple(int(c) for c in self.partition_counts))
        if not self.initial_sets:
            raise ValueError("at least one initial set is required")
        n = self.initial_sets[0].ndim
        if any(b.ndim != n for b in self.initial_sets):
            raise ValueError("initial sets must all have the same dimension")
        if int(self.horizon) < 1:
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if any(c < 1 for c in self.partition_counts):
            raise ValueError(f"partition counts must be positive, got {list(self.partition_counts)}")
        if self.safety is not None and not self.safety.is_whole_space and self.safety.dim != n:
            raise ValueError(f"safety constraints have dimension {self.safety.dim}, states have {n}")

    def validate(self, model: NarmaModel) -> None:
        """Check this scenario against a model's dimensions and lag orders."""
        if len(self.initial_sets) != model.d_x + 1:
            raise ValueError(
                f"model has d_x={model.d_x} and needs {model.d_x + 1} initial sets, "
                f"scenario gives {len(self.initial_sets)}"
            )
        for i, box in enumerate(self.initial_sets):
            if box.ndim != model.state_dim:
                raise ValueError(
                    f"initial set {i} has dimension {box.ndim}, state dimension is {model.state_dim}"
                )
        if self.input_set.ndim != model.input_dim:
            raise ValueError(
                f"input set has dimension {self.input_set.ndim}, input dimension is {model.input_dim}"
            )
        if len(self.partition_counts) != model.width:
            raise ValueError(
                f"need {model.width} partition counts (network input width), "
                f"got {len(self.partition_counts)}"
            )

    def with_counts(self, counts: Sequence[int]) -> Scenario:
        return replace(self, partition_counts=tuple(counts))

    def with_mode(self, mode: StepMode) -> Scenario:
        return replace(self, step_mode=mode)

    def with_horizon(self, horizon: int) -> Scenario:
        return replace(self, horizon=int(horizon))

    def with_safety(self, spec: SafetySpec | None) -> Scenario:
        return replace(self, safety=spec)


# -- parsing helpers ---------------------------------------------------------


def _read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FileFormatError(f"{path}: cannot read file: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc


def _write_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")


def _number(x: Any, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise FileFormatError(f"{where}: expected a number, got {x!r}")
    x = float(x)
    if not math.isfinite(x):
        raise FileFormatError(f"{where}: non-finite value {x!r}")
    return x


def _integer(x: Any, where: str, minimum: int = 0) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise FileFormatError(f"{where}: expected an integer, got {x!r}")
    if x < minimum:
        raise FileFormatError(f"{where}: must be >= {minimum}, got {x}")
    return x


def _box(obj: Any, where: str) -> CellBox:
    if not isinstance(obj, list) or not obj:
        raise FileFormatError(f"{where}: expected a nonempty list of [lo, hi] pairs")
    pairs = []
    for i, p in enumerate(obj):
        if not isinstance(p, list) or len(p) != 2:
            raise FileFormatError(f"{where}[{i}]: expected [lo, hi], got {p!r}")
        pairs.append((_number(p[0], f"{where}[{i}]"), _number(p[1], f"{where}[{i}]")))
    try:
        return CellBox.from_pairs(pairs)
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


# -- networks ----------------------------------------------------------------


def network_from_dict(obj: Any, source: str = "<network>") -> Network:
    if not isinstance(obj, dict) or "layers" not in obj:
        raise FileFormatError(f"{source}: top-level object must have a 'layers' list")
    raw = obj["layers"]
    if not isinstance(raw, list) or not raw:
        raise FileFormatError(f"{source}: 'layers' must be a nonempty list")
    layers = []
    for i, spec in enumerate(raw):
        where = f"{source}: layer {i}"
        if not isinstance(spec, dict):
            raise FileFormatError(f"{where}: expected an object")
        missing = {"weights", "bias", "activation"} - spec.keys()
        if missing:
            raise FileFormatError(f"{where}: missing {sorted(missing)}")
        rows = spec["weights"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise FileFormatError(f"{where}: 'weights' must be a nonempty list of rows")
        if len({len(r) for r in rows}) != 1:
            raise FileFormatError(f"{where}: weight rows have unequal lengths")
        w = [[_number(x, f"{where} weights") for x in r] for r in rows]
        if not isinstance(spec["bias"], list):
            raise FileFormatError(f"{where}: 'bias' must be a list")
        b = [_number(x, f"{where} bias") for x in spec["bias"]]
        try:
            layer = Layer(np.array(w), np.array(b), spec["activation"])
        except (ValueError, TypeError) as exc:
            raise FileFormatError(f"{where}: {exc}") from exc
        if layers and layer.n_in != layers[-1].n_out:
            raise FileFormatError(
                f"{where}: takes {layer.n_in} inputs but layer {i - 1} produces {layers[-1].n_out}"
            )
        layers.append(layer)
    return Network(tuple(layers))


def network_to_dict(net: Network) -> dict:
    return {
        "layers": [
            {
                "weights": [[float(x) for x in row] for row in layer.weights],
                "bias": [float(x) for x in layer.bias],
                "activation": layer.activation,
            }
            for layer in net.layers
        ]
    }


def load_network(path: str | Path) -> Network:
    return network_from_dict(_read_json(path), str(path))


def save_network(net: Network, path: str | Path) -> None:
    _write_json(network_to_dict(net), path)


def narma_from_dict(obj: Any, source: str = "<model>") -> NarmaModel:
    net = network_from_dict(obj, source)
    for key in ("state_dim", "input_dim", "d_x", "d_u"):
        if key not in obj:
            raise FileFormatError(f"{source}: NARMA model needs '{key}'")
    try:
        return NarmaModel(
            net,
            state_dim=_integer(obj["state_dim"], f"{source}: state_dim", 1),
            input_dim=_integer(obj["input_dim"], f"{source}: input_dim", 1),
            d_x=_integer(obj["d_x"], f"{source}: d_x"),
            d_u=_integer(obj["d_u"], f"{source}: d_u"),
        )
    except ValueError as exc:
        if isinstance(exc, FileFormatError):
            raise
        raise FileFormatError(f"{source}: {exc}") from exc


def narma_to_dict(model: NarmaModel) -> dict:
    out = {
        "state_dim": model.state_dim,
        "input_dim": model.input_dim,
        "d_x": model.d_x,
        "d_u": model.d_u,
    }
    out.update(network_to_dict(model.net))
    return out


def load_narma(path: str | Path) -> NarmaModel:
    return narma_from_dict(_read_json(path), str(path))


def save_narma(model: NarmaModel, path: str | Path) -> None:
    _write_json(narma_to_dict(model), path)


# -- scenarios ---------------------------------------------------------------


def _step_mode(obj: Any, where: str) -> StepMode:
    if obj == "hull":
        return StepMode.hull()
    if isinstance(obj, dict) and set(obj) == {"union"} and isinstance(obj["union"], dict):
        if "max_boxes" not in obj["union"]:
            raise FileFormatError(f"{where}: union mode needs 'max_boxes'")
        return StepMode.union(_integer(obj["union"]["max_boxes"], f"{where}: max_boxes", 1))
    raise FileFormatError(f"{where}: expected \"hull\" or {{\"union\": {{\"max_boxes\": N}}}}, got {obj!r}")


def _safety(obj: Any, where: str) -> SafetySpec:
    if obj == "whole_space":
        return SafetySpec.whole_space()
    if not isinstance(obj, list) or not obj:
        raise FileFormatError(f"{where}: expected a nonempty constraint list or \"whole_space\"")
    cons = []
    for i, c in enumerate(obj):
        if not isinstance(c, dict) or set(c) != {"a", "b"} or not isinstance(c["a"], list):
            raise FileFormatError(f"{where}[{i}]: expected {{\"a\": [...], \"b\": number}}")
        a = [_number(x, f"{where}[{i}].a") for x in c["a"]]
        try:
            cons.append(HalfSpace(a, _number(c["b"], f"{where}[{i}].b")))
        except ValueError as exc:
            raise FileFormatError(f"{where}[{i}]: {exc}") from exc
    try:
        return SafetySpec(tuple(cons))
    except ValueError as exc:
        raise FileFormatError(f"{where}: {exc}") from exc


def safety_to_obj(spec: SafetySpec) -> Any:
    if spec.is_whole_space:
        return "whole_space"
    return [{"a": [float(x) for x in c.a], "b": float(c.b)} for c in spec.constraints]


def scenario_from_dict(obj: Any, source: str = "<scenario>", model: NarmaModel | None = None) -> Scenario:
    if not isinstance(obj, dict):
        raise FileFormatError(f"{source}: top-level value must be an object")
    required = {"initial_sets", "input_set", "horizon", "partition_counts"}
    missing = required - obj.keys()
    if missing:
        raise FileFormatError(f"{source}: missing {sorted(missing)}")
    unknown = obj.keys() - required - {"step_mode", "safety"}
    if unknown:
        raise FileFormatError(f"{source}: unknown keys {sorted(unknown)}")
    if not isinstance(obj["initial_sets"], list) or not obj["initial_sets"]:
        raise FileFormatError(f"{source}: 'initial_sets' must be a nonempty list of boxes")
    initial = tuple(_box(b, f"{source}: initial_sets[{i}]") for i, b in enumerate(obj["initial_sets"]))
    counts = obj["partition_counts"]
    if not isinstance(counts, list) or not counts:
        raise FileFormatError(f"{source}: 'partition_counts' must be a nonempty list")
    counts = tuple(_integer(c, f"{source}: partition_counts", 1) for c in counts)
    mode = _step_mode(obj.get("step_mode", "hull"), f"{source}: step_mode")
    safety = _safety(obj["safety"], f"{source}: safety") if "safety" in obj else None
    try:
        scen = Scenario(
            initial_sets=initial,
            input_set=_box(obj["input_set"], f"{source}: input_set"),
            horizon=_integer(obj["horizon"], f"{source}: horizon", 1),
            partition_counts=counts,
            step_mode=mode,
            safety=safety,
        )
        if model is not None:
            scen.validate(model)
    except ValueError as exc:
        if isinstance(exc, FileFormatError):
            raise
        raise FileFormatError(f"{source}: {exc}") from exc
    return scen


def scenario_to_dict(s: Scenario) -> dict:
    out: dict[str, Any] = {
        "initial_sets": [b.pairs() for b in s.initial_sets],
        "input_set": s.input_set.pairs(),
        "horizon": s.horizon,
        "partition_counts": list(s.partition_counts),
        "step_mode": "hull" if s.step_mode.kind == "hull" else {"union": {"max_boxes": s.step_mode.max_boxes}},
    }
    if s.safety is not None:
        out["safety"] = safety_to_obj(s.safety)
    return out


def load_scenario(path: str | Path, model: NarmaModel | None = None) -> Scenario:
    """Load a scenario; with ``model`` given, also check it against the model."""
    return scenario_from_dict(_read_json(path), str(path), model)


def save_scenario(s: Scenario, path: str | Path) -> None:
    _write_json(scenario_to_dict(s), path)


def fixture_path(name: str, kind: str = "model") -> Path:
    """Path of a bundled fixture, e.g. ``fixture_path("maglev_narma", "scenario")``."""
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    suffix = {"model": ".json", "scenario": ".scenario.json"}[kind]
    return Path(str(resources.files("nnreach") / "data" / f"{name}{suffix}"))

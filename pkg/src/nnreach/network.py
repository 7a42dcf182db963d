"""MLP and NARMA model data structures and exact forward evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ACTIVATIONS",
    "register_activation",
    "Layer",
    "Network",
    "NarmaModel",
    "eval_network",
    "forward",
    "narma_input",
    "narma_step",
]


def _linear(z: np.ndarray) -> np.ndarray:
    return z


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _logistic(z: np.ndarray) -> np.ndarray:
    # exp(-z) may overflow to inf for very negative z, giving exactly 0;
    # every step is monotone, and small outputs keep full relative precision
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "logistic": _logistic,
    "relu": _relu,
    "linear": _linear,
}


def register_activation(name: str, fn: Callable[[np.ndarray], np.ndarray], *, probe: int = 10_001) -> None:
    """Add a monotone activation under ``name``.

    ``fn`` must act elementwise on float64 arrays. Monotonicity cannot be
    proven here; it is spot-checked on a dense grid over [-50, 50] and
    registration is refused if any decrease shows up.
    """
    if name in ACTIVATIONS:
        raise ValueError(f"activation {name!r} already registered")
    grid = np.linspace(-50.0, 50.0, probe)
    y = np.asarray(fn(grid), dtype=np.float64)
    if y.shape != grid.shape or not np.all(np.isfinite(y)):
        raise ValueError(f"activation {name!r} must map arrays elementwise to finite values")
    if np.any(np.diff(y) < 0):
        raise ValueError(f"activation {name!r} is not monotonically nondecreasing")
    ACTIVATIONS[name] = fn


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Layer:
    """One affine layer followed by an elementwise activation: ``h(W v + b)``."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        w = _frozen(self.weights)
        b = _frozen(self.bias)
        if w.ndim != 2 or w.shape[0] == 0 or w.shape[1] == 0:
            raise ValueError(f"weights must be a nonempty 2-D matrix, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias length {b.shape} does not match {w.shape[0]} weight rows")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("weights and bias must be finite")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}; expected one of {sorted(ACTIVATIONS)}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    @property
    def act(self) -> Callable[[np.ndarray], np.ndarray]:
        return ACTIVATIONS[self.activation]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Layer):
            return NotImplemented
        return (
            self.activation == other.activation
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.bias, other.bias)
        )


@dataclass(frozen=True, eq=True)
class Network:
    layers: tuple[Layer, ...]

    def __post_init__(self) -> None:
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for i in range(1, len(layers)):
            if layers[i].n_in != layers[i - 1].n_out:
                raise ValueError(
                    f"layer {i} expects {layers[i].n_in} inputs but layer {i - 1} "
                    f"produces {layers[i - 1].n_out}"
                )
        object.__setattr__(self, "layers", layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].n_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].n_out

    @property
    def widths(self) -> list[int]:
        return [self.input_dim] + [layer.n_out for layer in self.layers]


def affine(weights: np.ndarray, bias: np.ndarray, v: np.ndarray) -> np.ndarray:
    """``v @ W.T + b`` for a batch ``v`` of shape ``(N, n_in)``.

    The dot product is accumulated column by column, left to right, instead
    of going through BLAS. Every row is then computed by the same fixed
    sequence of roundings regardless of batch size, which keeps results
    schedule-independent and lets the interval bounds dominate point
    evaluations exactly (rounding is monotone).
    """
    z = v[:, 0:1] * weights[:, 0]
    for j in range(1, weights.shape[1]):
        z = z + v[:, j : j + 1] * weights[:, j]
    return z + bias


def forward(net: Network, v: np.ndarray) -> np.ndarray:
    """Batched forward pass; ``v`` has shape ``(N, input_dim)``."""
    y = np.asarray(v, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != net.input_dim:
        raise ValueError(f"expected inputs of shape (N, {net.input_dim}), got {y.shape}")
    for layer in net.layers:
        y = layer.act(affine(layer.weights, layer.bias, y))
    return y


def eval_network(net: Network, v: Sequence[float]) -> np.ndarray:
    """Output ``H(v)`` of the network at a single input vector."""
    x = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if x.ndim != 1 or x.shape[0] != net.input_dim:
        raise ValueError(f"network takes {net.input_dim} inputs, got shape {x.shape}")
    return forward(net, x[None, :])[0]


@dataclass(frozen=True)
class NarmaModel:
    """Network realising ``x(k+1) = f(x(k), ..., x(k-d_x), u(k), ..., u(k-d_u))``.

    The network input is laid out newest first, all states before all
    inputs: ``[x(k), x(k-1), ..., x(k-d_x), u(k), ..., u(k-d_u)]``.
    """

    net: Network
    state_dim: int
    input_dim: int
    d_x: int
    d_u: int

    def __post_init__(self) -> None:
        for name in ("state_dim", "input_dim"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if self.d_u < 0 or self.d_x < 0:
            raise ValueError("lag orders must be nonnegative")
        if self.d_x < self.d_u:
            raise ValueError(f"d_x ({self.d_x}) must be >= d_u ({self.d_u})")
        if self.net.input_dim != self.width:
            raise ValueError(
                f"network takes {self.net.input_dim} inputs but the lag layout needs "
                f"{self.state_dim}*{self.d_x + 1} + {self.input_dim}*{self.d_u + 1} = {self.width}"
            )
        if self.net.output_dim != self.state_dim:
            raise ValueError(
                f"network produces {self.net.output_dim} outputs, state dimension is {self.state_dim}"
            )

    @property
    def width(self) -> int:
        return self.state_dim * (self.d_x + 1) + self.input_dim * (self.d_u + 1)

    @property
    def state_slots(self) -> int:
        return self.d_x + 1

    @property
    def input_slots(self) -> int:
        return self.d_u + 1


def _history(hist: Sequence, length: int, dim: int, what: str) -> list[np.ndarray]:
    if len(hist) != length:
        raise ValueError(f"{what} history must have {length} entries, got {len(hist)}")
    out = []
    for vec in hist:
        a = np.atleast_1d(np.asarray(vec, dtype=np.float64))
        if a.shape != (dim,):
            raise ValueError(f"{what} vectors must have dimension {dim}, got shape {a.shape}")
        out.append(a)
    return out


def narma_input(model: NarmaModel, x_hist: Sequence, u_hist: Sequence) -> np.ndarray:
    """Concatenate newest-first histories into the network input vector."""
    xs = _history(x_hist, model.d_x + 1, model.state_dim, "state")
    us = _history(u_hist, model.d_u + 1, model.input_dim, "input")
    return np.concatenate(xs + us)


def narma_step(model: NarmaModel, x_hist: Sequence, u_hist: Sequence) -> np.ndarray:
    """Next state ``x(k+1)`` from ``[x(k), ..., x(k-d_x)]`` and ``[u(k), ..., u(k-d_u)]``."""
    return eval_network(model.net, narma_input(model, x_hist, u_hist))

"""Feedforward network representation, evaluation, and serialization.

A network is an immutable stack of affine layers. Every layer except the
last applies a scalar activation elementwise; the last layer is purely
affine with a single output neuron. Depth is the number of hidden layers
plus one, width is the size of the largest hidden layer, and size is the
total neuron count across all layers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

FORMAT_TAG = "maxnet-ffn/1"


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _identity(z: np.ndarray) -> np.ndarray:
    return z


def _softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(z, 0.0)


# Closed enumeration: relu is what the constructions emit; identity and
# softplus exist so the evaluator can be exercised with other polynomially
# bounded activations.
ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "relu": _relu,
    "identity": _identity,
    "softplus": _softplus,
}


class ParseError(ValueError):
    """Malformed serialized network document.

    Carries a human-readable ``location`` (line/column for JSON syntax
    errors, a field path for structural problems).
    """

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message}" + (f" (at {location})" if location else ""))
        self.location = location


class NumericOverflowError(ArithmeticError):
    """A non-finite value appeared while evaluating a network.

    ``sample`` holds the offending input when available.
    """

    def __init__(self, message: str, sample=None):
        super().__init__(message)
        self.sample = sample


@dataclass(frozen=True)
class AffineLayer:
    """One affine map ``z = W x + b``, optionally followed by the activation.

    ``weights`` has shape (out_width, in_width); ``biases`` has shape
    (out_width,). ``apply_activation`` is False only for the final layer.
    """

    weights: np.ndarray
    biases: np.ndarray
    apply_activation: bool = True

    def __post_init__(self):
        w = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.biases, dtype=np.float64))
        if w.ndim != 2:
            raise ValueError(f"weights must be a matrix, got ndim={w.ndim}")
        if b.shape != (w.shape[0],):
            raise ValueError(
                f"bias shape {b.shape} does not match {w.shape[0]} output rows"
            )
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(b)):
            raise ValueError("layer parameters must be finite")
        w = np.ascontiguousarray(w)
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "biases", b)

    @property
    def out_width(self) -> int:
        return self.weights.shape[0]

    @property
    def in_width(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class FeedForwardNet:
    """Immutable fully connected network from R^input_dim to R.

    Invariants enforced at construction time:
      * consecutive layer dimensions chain,
      * the final layer is affine-only (no activation) with one output,
      * every earlier layer applies the activation,
      * all parameters are finite.

    Safe for concurrent read-only evaluation; nothing here mutates.
    """

    input_dim: int
    layers: tuple[AffineLayer, ...]
    activation: str = "relu"
    metadata: str = ""

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if not self.layers:
            raise ValueError("a network needs at least the output layer")
        if self.activation not in ACTIVATIONS:
            raise ValueError(
                f"unknown activation {self.activation!r}; "
                f"choose one of {sorted(ACTIVATIONS)}"
            )
        expect = self.input_dim
        for idx, layer in enumerate(self.layers):
            if layer.in_width != expect:
                raise ValueError(
                    f"layer {idx} expects {layer.in_width} inputs, "
                    f"previous width is {expect}"
                )
            expect = layer.out_width
        last = self.layers[-1]
        if last.out_width != 1:
            raise ValueError("final layer must have a single output neuron")
        if last.apply_activation:
            raise ValueError("final layer must be affine-only")
        for idx, layer in enumerate(self.layers[:-1]):
            if not layer.apply_activation:
                raise ValueError(f"hidden layer {idx} must apply the activation")

    @property
    def hidden_layers(self) -> tuple[AffineLayer, ...]:
        return self.layers[:-1]


@dataclass(frozen=True)
class NetStats:
    """Depth / width / size / largest parameter magnitude of a network."""

    depth: int
    width: int
    size: int
    max_abs_weight: float


def evaluate_batch(net: FeedForwardNet, X: np.ndarray) -> np.ndarray:
    """Evaluate the network on a batch of inputs, shape (n, input_dim) -> (n,)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != net.input_dim:
        raise ValueError(
            f"expected inputs of shape (n, {net.input_dim}), got {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs must be finite")
    act = ACTIVATIONS[net.activation]
    h = X
    for layer in net.layers:
        h = h @ layer.weights.T
        h += layer.biases
        if layer.apply_activation:
            h = act(h)
        if not np.all(np.isfinite(h)):
            bad = int(np.argwhere(~np.isfinite(h))[0, 0])
            raise NumericOverflowError(
                "non-finite intermediate during evaluation", sample=X[bad].copy()
            )
    return h[:, 0]


def evaluate(net: FeedForwardNet, x: Sequence[float]) -> float:
    """Evaluate the network at a single point. Pure and deterministic."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.input_dim,):
        raise ValueError(f"expected a vector of length {net.input_dim}, got {x.shape}")
    return float(evaluate_batch(net, x[None, :])[0])


def stats(net: FeedForwardNet) -> NetStats:
    """Compute depth, width, size, and max |parameter| of a network."""
    hidden = net.hidden_layers
    depth = len(hidden) + 1
    width = max((layer.out_width for layer in hidden), default=0)
    size = sum(layer.out_width for layer in net.layers)
    max_abs = 0.0
    for layer in net.layers:
        max_abs = max(
            max_abs,
            float(np.abs(layer.weights).max(initial=0.0)),
            float(np.abs(layer.biases).max(initial=0.0)),
        )
    return NetStats(depth=depth, width=width, size=size, max_abs_weight=max_abs)


def lipschitz_upper_bound(net: FeedForwardNet) -> float:
    """Product of layer Frobenius norms, an upper bound on the Lipschitz
    constant of the network for 1-Lipschitz activations (relu, identity,
    softplus all qualify)."""
    bound = 1.0
    for layer in net.layers:
        bound *= float(np.linalg.norm(layer.weights))
    return bound


def serialize(net: FeedForwardNet) -> str:
    """Serialize to a self-describing JSON document.

    Floats are emitted with Python's shortest round-trip repr, so
    deserialize(serialize(net)) reproduces weights bit-exactly.
    """
    doc = {
        "format": FORMAT_TAG,
        "input_dim": net.input_dim,
        "activation": net.activation,
        "metadata": net.metadata,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
                "apply_activation": layer.apply_activation,
            }
            for layer in net.layers
        ],
    }
    return json.dumps(doc, indent=1)


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ParseError(f"missing field {key!r}", where)
    return doc[key]


def deserialize(text: str) -> FeedForwardNet:
    """Parse a document produced by :func:`serialize`.

    Raises :class:`ParseError` with a location for malformed documents and
    ``ValueError`` for structurally valid documents that describe an
    inconsistent network (e.g. mismatched layer widths).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno}, column {exc.colno}") from exc
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object", "root")
    layers_doc = _require(doc, "layers", "root")
    if not isinstance(layers_doc, list) or not layers_doc:
        raise ParseError("'layers' must be a non-empty list", "layers")
    layers = []
    for idx, entry in enumerate(layers_doc):
        where = f"layers[{idx}]"
        if not isinstance(entry, dict):
            raise ParseError("layer entry must be an object", where)
        try:
            layer = AffineLayer(
                weights=np.asarray(_require(entry, "weights", where), dtype=np.float64),
                biases=np.asarray(_require(entry, "biases", where), dtype=np.float64),
                apply_activation=bool(_require(entry, "apply_activation", where)),
            )
        except (TypeError, ValueError) as exc:
            raise ValueError(f"invalid layer at {where}: {exc}") from exc
        layers.append(layer)
    return FeedForwardNet(
        input_dim=int(_require(doc, "input_dim", "root")),
        layers=tuple(layers),
        activation=str(_require(doc, "activation", "root")),
        metadata=str(doc.get("metadata", "")),
    )


def save(net: FeedForwardNet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(net))


def load(path) -> FeedForwardNet:
    with open(path, "r", encoding="utf-8") as fh:
        return deserialize(fh.read())

"""ReLU networks that compute or approximate the d-input maximum.

Three families:

* :func:`depth3_max` -- depth 3, width exactly d(d+1). The first hidden
  layer computes, per coordinate i, the pair relu(x_i), relu(-x_i) and the
  shared penalty neurons relu(alpha x_j - alpha x_i) for j != i. The second
  hidden layer clips each "polytope" piece at zero, and the output sums the
  positive and negative pieces. Output equals max(x) whenever no coordinate
  ratio falls within 1/alpha of 1, and is bounded by ||x||_1 everywhere.

* :func:`deep_max` -- depth 2k+1 recursion: split the input into
  ceil(d^(1-beta(k))) batches of size at most ceil(d^(beta(k))) with
  beta(k) = 1/(2^k - 1), take the depth-3 maximum of each batch, and feed
  the batch maxima to the depth 2(k-1)+1 construction. Sub-network output
  layers are algebraically merged into the following hidden layer so the
  result has exactly 2k hidden layers. Width stays below 20 d^(1+beta(k))
  for d >= 58 and 1 <= k <= ceil(log2(log2(d)+1)).

* :func:`exact_max_tree` -- pairwise-max binary tree using
  max(a, b) = relu(a-b) + relu(b) - relu(-b), exact on all of R^d with
  depth ceil(log2 d) + 1 and O(d) neurons.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np

from .network import AffineLayer, FeedForwardNet, stats


def beta(k: int) -> Fraction:
    """Width exponent 1/(2^k - 1) of the depth-(2k+1) construction, exact."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return Fraction(1, 2**k - 1)


def alpha_for_accuracy(d: int, R: float, epsilon: float) -> float:
    """Weight scale guaranteeing mean squared error <= epsilon on uniform [0,R]^d.

    Uses the explicit constant 2 d^2 (d+1)^2 R^2 / epsilon obtained from the
    chain P[x not 1/alpha-separated] <= 2 d^2 / alpha and the requirement
    that this probability times the worst-case squared error (d+1)^2 R^2 be
    at most epsilon. This is an upper bound on the needed alpha and is
    typically loose by orders of magnitude.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if R <= 0 or epsilon <= 0:
        raise ValueError("R and epsilon must be positive")
    return 2.0 * d * d * (d + 1) * (d + 1) * R * R / epsilon


def _ceil_root_pow(d: int, num: int, den: int) -> int:
    """Smallest integer m >= 1 with m^den >= d^num, i.e. ceil(d^(num/den)).

    Exact integer arithmetic; avoids float pow landing on the wrong side of
    an integer for perfect powers.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    target = d**num
    m = max(1, int(round(d ** (num / den))))
    while m > 1 and (m - 1) ** den >= target:
        m -= 1
    while m**den < target:
        m += 1
    return m


def batch_split(d: int, k: int) -> list[int]:
    """Batch sizes used by the depth-(2k+1) recursion at its top level.

    Exactly ceil(d^(1-beta(k))) batches, as equal as possible, every batch
    of size at most ceil(d^(beta(k))) and at least 1.
    """
    q = 2**k - 1
    n_batches = _ceil_root_pow(d, q - 1, q)
    base, rem = divmod(d, n_batches)
    return [base + 1 if i < rem else base for i in range(n_batches)]


def depth3_shape(d: int) -> list[int]:
    """Hidden layer widths of depth3_max without building it."""
    return [d * (d + 1), 2 * d]


def deep_shape(d: int, k: int) -> list[int]:
    """Hidden layer widths of deep_max without building it.

    This is the neuron count of the recursion itself and is the cheap
    route for width assertions at dimensions where dense weight matrices
    would not fit in memory.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return depth3_shape(d)
    sizes = batch_split(d, k)
    head = [sum(s * (s + 1) for s in sizes), 2 * d]
    return head + deep_shape(len(sizes), k - 1)


def max_k_for_width_bound(d: int) -> int:
    """Largest k for which the 20 d^(1+beta(k)) width bound is asserted."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return math.ceil(math.log2(math.log2(d) + 1))


def _depth3_layers(d: int, alpha: float) -> list[AffineLayer]:
    """Hidden layers plus output layer of the depth-3 block, d >= 1.

    For d == 1 the formula degenerates to relu(relu(x)) - relu(relu(-x)),
    an identity pass-through occupying two hidden layers; this is what a
    size-1 batch of the deep construction becomes.
    """
    w1 = np.zeros((d * (d + 1), d))
    for i in range(d):
        row = i * (d + 1)
        w1[row, i] = 1.0  # relu(x_i)
        w1[row + 1, i] = -1.0  # relu(-x_i)
        # shared sum: relu(alpha x_j - alpha x_i), j != i, computed once per i
        offset = row + 2
        for j in range(d):
            if j == i:
                continue
            w1[offset, j] = alpha
            w1[offset, i] = -alpha
            offset += 1
    w2 = np.zeros((2 * d, d * (d + 1)))
    for i in range(d):
        row = i * (d + 1)
        w2[2 * i, row] = 1.0
        w2[2 * i + 1, row + 1] = 1.0
        w2[2 * i, row + 2 : row + d + 1] = -1.0
        w2[2 * i + 1, row + 2 : row + d + 1] = -1.0
    w3 = np.zeros((1, 2 * d))
    w3[0, ::2] = 1.0
    w3[0, 1::2] = -1.0
    return [
        AffineLayer(w1, np.zeros(d * (d + 1))),
        AffineLayer(w2, np.zeros(2 * d)),
        AffineLayer(w3, np.zeros(1), apply_activation=False),
    ]


def depth3_max(d: int, alpha: float) -> FeedForwardNet:
    """Depth-3, width-d(d+1) approximation of max(x_1..x_d).

    Exact on 1/alpha-separated inputs; |output| <= ||x||_1 everywhere.
    max |weight| is max(alpha, 1) and all biases are zero.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")
    return FeedForwardNet(
        input_dim=d,
        layers=tuple(_depth3_layers(d, alpha)),
        metadata=f"depth3_max d={d} alpha={alpha!r}",
    )


def _block_diag(blocks: list[np.ndarray]) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        out[r : r + b.shape[0], c : c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def _deep_layers(d: int, alpha: float, k: int) -> list[AffineLayer]:
    if k == 1:
        return _depth3_layers(d, alpha)
    sizes = batch_split(d, k)
    blocks = [_depth3_layers(s, alpha) for s in sizes]
    w1 = _block_diag([b[0].weights for b in blocks])
    w2 = _block_diag([b[1].weights for b in blocks])
    out_rows = _block_diag([b[2].weights for b in blocks])  # batch maxima
    inner = _deep_layers(len(sizes), alpha, k - 1)
    merged = AffineLayer(inner[0].weights @ out_rows, inner[0].biases)
    return [
        AffineLayer(w1, np.zeros(w1.shape[0])),
        AffineLayer(w2, np.zeros(w2.shape[0])),
        merged,
        *inner[1:],
    ]


def deep_max(d: int, alpha: float, k: int) -> FeedForwardNet:
    """Depth-(2k+1) recursive approximation of max(x_1..x_d).

    k = 1 coincides with depth3_max. For k > 1 the input is split into
    ceil(d^(1-beta(k))) batches whose depth-3 maxima feed the k-1
    construction; sub-block output layers are merged so there are exactly
    2k hidden layers. Exact on 1/alpha-separated inputs and bounded by
    ||x||_1 everywhere.
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    if not (alpha > 0 and math.isfinite(alpha)):
        raise ValueError("alpha must be positive and finite")
    if k < 1:
        raise ValueError("k must be >= 1")
    net = FeedForwardNet(
        input_dim=d,
        layers=tuple(_deep_layers(d, alpha, k)),
        metadata=f"deep_max d={d} alpha={alpha!r} k={k}",
    )
    # Merging composes +-1 output rows with the next layer, which cannot
    # grow magnitudes; flag (not fail) if that expectation is ever violated.
    max_abs = stats(net).max_abs_weight
    if max_abs > max(alpha, 1.0) * (1.0 + 1e-12):
        warnings.warn(
            f"merged deep_max weight magnitude {max_abs} exceeds max(alpha, 1)",
            RuntimeWarning,
            stacklevel=2,
        )
    return net


def exact_max_tree(d: int) -> FeedForwardNet:
    """Exact pairwise-max tree: depth ceil(log2 d) + 1, O(d) neurons.

    Computes max(x) for every x in R^d up to float rounding, via
    max(a, b) = relu(a-b) + relu(b) - relu(-b) applied along a binary tree.
    d = 1 yields the affine identity network.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    layers: list[AffineLayer] = []
    # Current values are affine in the previous layer's outputs: v = C h + c.
    C = np.eye(d)
    c = np.zeros(d)
    while C.shape[0] > 1:
        m = C.shape[0]
        n_pairs, odd = divmod(m, 2)
        w_rows, combine_rows = [], []
        col = 0
        for p in range(n_pairs):
            a, b = 2 * p, 2 * p + 1
            w_rows.extend([C[a] - C[b], C[b], -C[b]])
            combine = np.zeros(3 * n_pairs + 2 * odd)
            combine[col : col + 3] = (1.0, 1.0, -1.0)
            combine_rows.append(combine)
            col += 3
        b_new = []
        for p in range(n_pairs):
            a, b = 2 * p, 2 * p + 1
            b_new.extend([c[a] - c[b], c[b], -c[b]])
        if odd:
            w_rows.extend([C[-1], -C[-1]])
            b_new.extend([c[-1], -c[-1]])
            combine = np.zeros(3 * n_pairs + 2)
            combine[col : col + 2] = (1.0, -1.0)
            combine_rows.append(combine)
        layers.append(AffineLayer(np.array(w_rows), np.array(b_new)))
        C = np.array(combine_rows)
        c = np.zeros(C.shape[0])
    layers.append(AffineLayer(C.reshape(1, -1), c[:1], apply_activation=False))
    return FeedForwardNet(input_dim=d, layers=tuple(layers), metadata=f"exact_max_tree d={d}")


def rescale_to_box(net: FeedForwardNet, a: float, R: float) -> FeedForwardNet:
    """Conjugate a unit-box max approximator to the box [a, a+R]^d.

    Returns N' with N'(x) = R * N((x - a 1)/R) + a exactly, for any net N.
    If N approximates max on [0,1]^d with mean squared error e, N'
    approximates max on uniform [a, a+R]^d with error exactly R^2 e, since
    max(R y + a 1) = R max(y) + a.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    first = net.layers[0]
    w_first = first.weights / R
    b_first = first.biases - (a / R) * first.weights.sum(axis=1)
    last = net.layers[-1]
    if len(net.layers) == 1:
        # single affine layer receives both the input and output transforms
        layers = [
            AffineLayer(R * w_first, R * b_first + a, apply_activation=False)
        ]
    else:
        layers = [AffineLayer(w_first, b_first, first.apply_activation)]
        layers.extend(net.layers[1:-1])
        layers.append(
            AffineLayer(R * last.weights, R * last.biases + a, apply_activation=False)
        )
    return FeedForwardNet(
        input_dim=net.input_dim,
        layers=tuple(layers),
        activation=net.activation,
        metadata=f"{net.metadata} | rescaled to [{a!r}, {a + R!r}]^d",
    )

"""Distributions, ratio-separation tests, and Monte Carlo error estimation.

Sampling is sharded: shard i of a run with root seed s draws from
``default_rng([s, i])``, so estimates are reproducible bit-for-bit and
independent of how many worker threads execute the shards. The reduction
(sums of per-sample squared errors) is performed in shard order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .network import FeedForwardNet, evaluate_batch

Z95 = 1.959963984540054  # two-sided 95% normal quantile


def max_threads() -> int:
    """Worker-thread cap, from MAXNET_THREADS (default 1).

    Only affects wall-clock time; results are identical for any value.
    """
    try:
        return max(1, int(os.environ.get("MAXNET_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class DistributionSpec:
    """Sampling law for inputs. Deterministic given (spec, seed).

    kinds:
      * ``uniform_box``: iid coordinates uniform on [a, a+R]
      * ``gaussian_std``: iid standard normal coordinates
      * ``iid_plus_noise``: discrete base (rademacher corners) plus iid
        continuous noise (uniform on [-scale/2, scale/2] or centered
        gaussian with standard deviation scale)
    """

    kind: str
    d: int
    a: float = 0.0
    R: float = 1.0
    base: str = "rademacher"
    noise: str = "uniform"
    noise_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("uniform_box", "gaussian_std", "iid_plus_noise"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.R <= 0:
            raise ValueError("R must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.kind == "iid_plus_noise":
            if self.base != "rademacher":
                raise ValueError("supported base source: rademacher")
            if self.noise not in ("uniform", "gaussian"):
                raise ValueError("noise must be 'uniform' or 'gaussian'")
            if self.noise_scale <= 0:
                raise ValueError("noise_scale must be positive")

    @classmethod
    def uniform_box(cls, d: int, a: float = 0.0, R: float = 1.0, seed: int = 0):
        return cls(kind="uniform_box", d=d, a=a, R=R, seed=seed)

    @classmethod
    def gaussian_std(cls, d: int, seed: int = 0):
        return cls(kind="gaussian_std", d=d, seed=seed)

    @classmethod
    def iid_plus_noise(
        cls,
        d: int,
        noise: str = "uniform",
        noise_scale: float = 0.1,
        seed: int = 0,
    ):
        return cls(
            kind="iid_plus_noise", d=d, noise=noise, noise_scale=noise_scale, seed=seed
        )

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "uniform_box":
            return self.a + self.R * rng.random((n, self.d))
        if self.kind == "gaussian_std":
            return rng.standard_normal((n, self.d))
        base = rng.integers(0, 2, size=(n, self.d)).astype(np.float64) * 2.0 - 1.0
        if self.noise == "uniform":
            return base + self.noise_scale * (rng.random((n, self.d)) - 0.5)
        return base + self.noise_scale * rng.standard_normal((n, self.d))


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo mean squared error with a normal-approximation 95% CI."""

    mean_sq_error: float
    std_error: float
    n_samples: int
    ci95: tuple[float, float]


@dataclass(frozen=True)
class ProportionEstimate:
    """Monte Carlo proportion with binomial std error and Wilson 95% CI."""

    proportion: float
    std_error: float
    n_samples: int
    ci95: tuple[float, float]


@dataclass(frozen=True)
class SeparationCertificate:
    """Outcome of the gap-implies-ratio-separation sufficient condition."""

    certified: bool
    delta: float | None
    reason: str


def max_oracle(x) -> float:
    """Exact maximum of a nonempty vector; the target of every construction."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("max of an empty vector is undefined")
    return float(np.max(x))


def row_max(X: np.ndarray) -> np.ndarray:
    """Vectorized max target for (n, d) batches."""
    return np.max(X, axis=1)


def _violation_mask(X: np.ndarray, delta: float) -> np.ndarray:
    """Rows of X that are NOT delta-separated.

    x_i / x_j lies in [1-delta, 1+delta] iff |x_i - x_j| <= delta |x_j|;
    pairs with x_j == 0 impose no constraint (literal reading of the
    quantifier "for all i != j, and x_j != 0").
    """
    diff = np.abs(X[:, :, None] - X[:, None, :])  # |x_i - x_j| at [n, i, j]
    tol = delta * np.abs(X)[:, None, :]
    close = (diff <= tol) & (np.abs(X) > 0)[:, None, :]
    d = X.shape[1]
    idx = np.arange(d)
    close[:, idx, idx] = False
    return close.any(axis=(1, 2))


def is_delta_separated(x, delta: float) -> bool:
    """True iff no coordinate ratio x_i/x_j (x_j != 0, i != j) is within
    delta of 1."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return not bool(_violation_mask(x[None, :], delta)[0])


def separation_from_gap(x, gap_delta: float, bound_M: float) -> SeparationCertificate:
    """Certify x in S_{gap_delta / bound_M} from additive gaps.

    If all pairwise |x_i - x_j| > gap_delta and all |x_j| <= bound_M, then
    every ratio is at least gap_delta / bound_M away from 1. Returns a
    negative certificate when either hypothesis fails.
    """
    if gap_delta <= 0 or bound_M <= 0:
        raise ValueError("gap_delta and bound_M must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if np.abs(x).max() > bound_M:
        return SeparationCertificate(False, None, "magnitude bound violated")
    diff = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(diff, np.inf)
    if diff.min() <= gap_delta:
        return SeparationCertificate(False, None, "pairwise gap violated")
    return SeparationCertificate(True, gap_delta / bound_M, "gap and bound hold")


def _shard_sizes(n: int, chunk: int) -> list[int]:
    full, rem = divmod(n, chunk)
    return [chunk] * full + ([rem] if rem else [])


def _run_shards(worker: Callable[[int, int], tuple], sizes: list[int], threads: int):
    """Execute shards, returning results in shard order regardless of the
    execution schedule."""
    if threads <= 1 or len(sizes) <= 1:
        return [worker(i, m) for i, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(len(sizes)), sizes))


def _default_chunk(width_hint: int) -> int:
    # keep the widest intermediate around 64 MB
    return max(256, min(131072, 8_388_608 // max(1, width_hint)))


def _net_width_hint(net: FeedForwardNet) -> int:
    return max(net.input_dim, max(layer.out_width for layer in net.layers))


def mc_l2_error(
    net: FeedForwardNet,
    target: Callable[[np.ndarray], np.ndarray],
    dist: DistributionSpec,
    n: int,
    seed: int | None = None,
    chunk: int | None = None,
    threads: int | None = None,
) -> ErrorEstimate:
    """Unbiased Monte Carlo estimate of E[(net(x) - target(x))^2].

    ``target`` maps an (n, d) batch to an (n,) vector. Deterministic given
    (dist, seed); the chunk size is a fixed function of the network shape
    so results do not depend on memory pressure or thread count.
    """
    if net.input_dim != dist.d:
        raise ValueError(f"net expects d={net.input_dim}, distribution has d={dist.d}")
    if n < 2:
        raise ValueError("n must be >= 2")
    root = dist.seed if seed is None else seed
    if chunk is None:
        chunk = _default_chunk(_net_width_hint(net))
    sizes = _shard_sizes(n, chunk)

    def worker(i: int, m: int):
        rng = np.random.default_rng([root, i])
        X = dist.sample(m, rng)
        err = evaluate_batch(net, X) - target(X)
        sq = err * err
        return float(sq.sum()), float((sq * sq).sum())

    parts = _run_shards(worker, sizes, max_threads() if threads is None else threads)
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / n
    var = max(0.0, (s2 - n * mean * mean) / (n - 1))
    se = (var / n) ** 0.5
    return ErrorEstimate(
        mean_sq_error=mean,
        std_error=se,
        n_samples=n,
        ci95=(mean - Z95 * se, mean + Z95 * se),
    )


def wilson_interval(successes: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * ((p * (1 - p) / n + z * z / (4 * n * n)) ** 0.5) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def estimate_violation_prob(
    dist: DistributionSpec,
    delta: float,
    n: int,
    seed: int | None = None,
    chunk: int = 65536,
    threads: int | None = None,
) -> ProportionEstimate:
    """Monte Carlo estimate of P[X not delta-separated] with a Wilson CI."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    root = dist.seed if seed is None else seed
    sizes = _shard_sizes(n, chunk)

    def worker(i: int, m: int):
        rng = np.random.default_rng([root, i])
        X = dist.sample(m, rng)
        return int(_violation_mask(X, delta).sum())

    parts = _run_shards(worker, sizes, max_threads() if threads is None else threads)
    hits = sum(parts)
    p = hits / n
    se = (p * (1 - p) / n) ** 0.5
    return ProportionEstimate(
        proportion=p, std_error=se, n_samples=n, ci95=wilson_interval(hits, n)
    )


def sample_separated(
    dist: DistributionSpec,
    delta: float,
    n: int,
    seed: int | None = None,
    max_draws: int = 200,
) -> np.ndarray:
    """Rejection-sample n points conditioned on delta-separation."""
    root = dist.seed if seed is None else seed
    kept: list[np.ndarray] = []
    total = 0
    for i in range(max_draws):
        rng = np.random.default_rng([root, i])
        X = dist.sample(max(n, 1024), rng)
        X = X[~_violation_mask(X, delta)]
        kept.append(X)
        total += len(X)
        if total >= n:
            break
    else:
        raise RuntimeError(
            f"rejection sampling did not reach {n} separated points "
            f"in {max_draws} rounds; delta={delta} may be too large"
        )
    return np.concatenate(kept)[:n]

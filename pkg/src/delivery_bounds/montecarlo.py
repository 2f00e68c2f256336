"""Direct simulation of protocol trees.

Used as an independent check on the exact engine and on the bounds.
Sampling is vectorised per node: a restart node first draws the number of
rounds for every sample, then draws all rounds at once and sums them back
per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .protocol import ProtocolNode

CHUNK = 1 << 16


@dataclass(frozen=True)
class SimEstimate:
    n_samples: int
    mean: float
    std_error: float
    empirical_co_cdf: np.ndarray  # index t -> fraction of samples > t
    seed: int
    is_upper_bound_model: bool = False

    def co_cdf(self, t):
        t = np.asarray(t)
        s = self.empirical_co_cdf
        idx = np.clip(t, 0, s.size - 1)
        v = np.where(t >= s.size, 0.0, np.where(t < 0, 1.0, s[idx]))
        return float(v) if v.ndim == 0 else v


def _geometric(p: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-transform geometric draws on {1, 2, ...}."""
    if p == 1.0:
        return np.ones(size, dtype=np.int64)
    u = rng.random(size)
    # 1 - u lies in (0, 1], so the log is finite
    k = np.ceil(np.log1p(-u) / math.log1p(-p))
    return np.maximum(k, 1).astype(np.int64)


def _sample(node: ProtocolNode, size: int, rng: np.random.Generator) -> np.ndarray:
    if node.is_leaf:
        return _geometric(node.p, size, rng)
    rounds = _geometric(node.p, size, rng)
    total = int(rounds.sum())
    per_round = _sample(node.children[0], total, rng)
    for child in node.children[1:]:
        np.maximum(per_round, _sample(child, total, rng), out=per_round)
    starts = np.zeros(size, dtype=np.int64)
    np.cumsum(rounds[:-1], out=starts[1:])
    return np.add.reduceat(per_round, starts)


def sample_completion(tree: ProtocolNode, rng: np.random.Generator) -> int:
    """One completion time, following the protocol step by step."""
    if tree.is_leaf:
        return int(_geometric(tree.p, 1, rng)[0])
    t = 0
    while True:
        t += max(sample_completion(c, rng) for c in tree.children)
        if tree.p == 1.0 or rng.random() < tree.p:
            return t


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Independent stream for a fixed-size block of samples."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def sample_many(tree: ProtocolNode, n_samples: int, seed: int,
                chunk_size: int = CHUNK) -> np.ndarray:
    """``n_samples`` draws; identical for identical (tree, n, seed, chunk_size)."""
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be >= 1")
    parts = []
    for c, lo in enumerate(range(0, n_samples, chunk_size)):
        size = min(chunk_size, n_samples - lo)
        parts.append(_sample(tree, size, chunk_rng(seed, c)))
    return np.concatenate(parts)


def estimate(tree: ProtocolNode, n_samples: int, seed: int,
             chunk_size: int = CHUNK) -> SimEstimate:
    """Sample mean, standard error and empirical co-CDF."""
    if n_samples < 1:
        raise InvalidParameterError("n_samples must be >= 1")
    counts = np.zeros(1, dtype=np.int64)
    for c, lo in enumerate(range(0, n_samples, chunk_size)):
        size = min(chunk_size, n_samples - lo)
        bc = np.bincount(_sample(tree, size, chunk_rng(seed, c)))
        if bc.size > counts.size:
            bc[:counts.size] += counts
            counts = bc
        else:
            counts[:bc.size] += bc
    t = np.arange(counts.size, dtype=np.float64)
    mu = float(np.dot(counts, t)) / n_samples
    if n_samples > 1:
        var = float(np.dot(counts, (t - mu) ** 2)) / (n_samples - 1)
        se = math.sqrt(var / n_samples)
    else:
        se = 0.0
    le = np.cumsum(counts)
    co = (n_samples - le) / n_samples
    return SimEstimate(n_samples=n_samples, mean=mu, std_error=se,
                       empirical_co_cdf=co, seed=seed,
                       is_upper_bound_model=tree.has_bound_mode())


def dkw_epsilon(n_samples: int, confidence: float = 0.99) -> float:
    """Dvoretzky-Kiefer-Wolfowitz half-width for the empirical CDF."""
    alpha = 1.0 - confidence
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n_samples))

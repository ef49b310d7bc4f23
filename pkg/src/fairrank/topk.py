"""Top-k membership probabilities ``q[x, k-1] = P(agent x among the top k by merit)``.

Column ``k-1`` of a top-k matrix always sums to ``k`` and every row is
nondecreasing and ends at 1.  Exact values are available for finite
(empirical) distributions; anything else goes through Monte Carlo.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import InvariantError
from .merit import EmpiricalMeritDistribution, MeritModel

BLOCK_SIZE = 4096


def check_topk(q, atol: float = 1e-9) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] == 0:
        raise InvariantError(f"top-k matrix must be square and nonempty, got shape {q.shape}")
    n = q.shape[0]
    if np.any(q < -atol) or np.any(q > 1 + atol):
        raise InvariantError("top-k probabilities must lie in [0, 1]")
    if np.any(np.diff(q, axis=1) < -atol):
        x, k = np.argwhere(np.diff(q, axis=1) < -atol)[0]
        raise InvariantError(f"row {x} decreases between k={k + 1} and k={k + 2}")
    bad = np.abs(q.sum(axis=0) - np.arange(1, n + 1)) > atol
    if np.any(bad):
        k = int(np.argmax(bad)) + 1
        raise InvariantError(f"column k={k} sums to {q[:, k - 1].sum()!r}, expected {k}")
    return q


def exact_topk(dist: EmpiricalMeritDistribution) -> np.ndarray:
    """Exact top-k matrix of a finite distribution, ties split uniformly.

    For an atom where ``above`` agents strictly beat x and ``tied`` others
    equal it, x lands in the top k with probability
    ``clip(k - above, 0, tied + 1) / (tied + 1)``.
    """
    support, probs = dist.support, dist.probs
    n = dist.n
    ks = np.arange(1, n + 1)
    q = np.zeros((n, n))
    for v, p in zip(support, probs):
        above = (v[None, :] > v[:, None]).sum(axis=1)
        tied = (v[None, :] == v[:, None]).sum(axis=1) - 1
        share = np.clip(ks[None, :] - above[:, None], 0, tied[:, None] + 1) / (tied[:, None] + 1)
        q += p * share
    return q


def rank_by_merit(merits: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orderings (position -> agent) of each row of ``merits``, best first.

    Ties are broken by an independent uniform key per draw.
    """
    merits = np.atleast_2d(merits)
    keys = rng.random(merits.shape)
    return np.lexsort((keys, -merits), axis=-1)


def position_counts(orders: np.ndarray) -> np.ndarray:
    """``counts[x, k]`` = number of orderings placing agent x at position k."""
    m, n = orders.shape
    flat = orders * n + np.arange(n)[None, :]
    return np.bincount(flat.ravel(), minlength=n * n).reshape(n, n)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FAIRRANK_THREADS", "1")))
    except ValueError:
        return 1


def _block_counts(model: MeritModel, seed: int, block: int, size: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    return position_counts(rank_by_merit(model.sample(size, rng), rng))


def sampled_position_counts(model: MeritModel, m: int, seed: int) -> np.ndarray:
    """Position counts of ``m`` Thompson draws.

    Draws are grouped in fixed blocks, block ``j`` seeded from ``(seed, j)``,
    so the result does not depend on the number of worker threads.
    """
    if m < 1:
        raise InvariantError("sample count must be >= 1")
    sizes = [BLOCK_SIZE] * (m // BLOCK_SIZE)
    if m % BLOCK_SIZE:
        sizes.append(m % BLOCK_SIZE)
    jobs = list(enumerate(sizes))
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _block_counts(model, seed, *j), jobs))
    else:
        parts = [_block_counts(model, seed, b, s) for b, s in jobs]
    return np.sum(parts, axis=0)


def monte_carlo_topk(model: MeritModel, m: int, seed: int) -> np.ndarray:
    counts = sampled_position_counts(model, m, seed)
    return np.cumsum(counts, axis=1) / m


def dkw_sample_size(n: int, kappa: float, epsilon: float) -> int:
    """Samples needed so every top-k estimate is within ``epsilon`` w.p. ``1 - n**-kappa``."""
    if n < 1:
        raise InvariantError("n must be >= 1")
    if kappa <= 0:
        raise InvariantError("kappa must be > 0")
    if not 0 < epsilon < 1:
        raise InvariantError("epsilon must lie in (0, 1)")
    return math.ceil((kappa + 1) * math.log(2 * n) / (2 * epsilon**2))


def robustify(q, epsilon: float) -> np.ndarray:
    """Inflate an ``epsilon``-accurate estimate so the LP built on it stays fair.

    Each entry becomes ``k (q + eps) / (k + n eps)``; column sums are
    unchanged.  A running maximum along each row restores monotonicity if the
    input was not monotone to begin with.
    """
    if epsilon < 0:
        raise InvariantError("epsilon must be >= 0")
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    if epsilon == 0:
        return q.copy()
    k = np.arange(1, n + 1)[None, :]
    out = k * (q + epsilon) / (k + n * epsilon)
    return np.maximum.accumulate(out, axis=1)

"""Position weights and the principal's utility."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvariantError


def check_weights(w) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size == 0:
        raise InvariantError("position weights must be nonempty")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvariantError("position weights must be finite and >= 0")
    if np.any(np.diff(w) > 0):
        k = int(np.argmax(np.diff(w) > 0)) + 1
        raise InvariantError(f"position weights increase at position {k + 1}")
    return w


def make_weights(kind, n: int) -> np.ndarray:
    """Position weights of length ``n``.

    ``kind`` is ``"dcg"``, ``"reciprocal"``, ``"precision:K"`` (or the tuple
    ``("precision", K)``), or an explicit sequence of weights.
    """
    if n < 1:
        raise InvariantError("n must be >= 1")
    k = np.arange(1, n + 1, dtype=float)
    if isinstance(kind, str):
        name, _, arg = kind.partition(":")
        if name == "dcg":
            return 1.0 / np.log2(1.0 + k)
        if name == "reciprocal":
            return 1.0 / k
        if name in ("precision", "precision_at") and arg:
            return precision_weights(int(arg), n)
        raise InvariantError(f"unknown weight kind {kind!r}")
    if isinstance(kind, tuple) and len(kind) == 2 and kind[0] in ("precision", "precision_at"):
        return precision_weights(int(kind[1]), n)
    w = check_weights(kind)
    if w.size != n:
        raise InvariantError(f"{w.size} weights given for {n} positions")
    return w


def precision_weights(cutoff: int, n: int) -> np.ndarray:
    if not 1 <= cutoff <= n:
        raise InvariantError(f"precision cutoff must be in 1..{n}, got {cutoff}")
    w = np.zeros(n)
    w[:cutoff] = 1.0 / cutoff
    return w


def ranking_utility(ranking, merits, w) -> float:
    """Sum over positions of ``w[k] * merit of the agent placed at k``."""
    ranking = np.asarray(ranking)
    merits = np.asarray(merits, dtype=float)
    w = np.asarray(w, dtype=float)
    if not (ranking.size == merits.size == w.size):
        raise InvariantError(
            f"length mismatch: ranking {ranking.size}, merits {merits.size}, weights {w.size}"
        )
    if sorted(ranking.tolist()) != list(range(ranking.size)):
        raise InvariantError("ranking is not a permutation")
    return float(w @ merits[ranking])


def policy_utility(marginals, expected, w) -> float:
    """Expected utility of a policy with marginal rank matrix ``marginals``."""
    P = np.asarray(marginals, dtype=float)
    e = np.asarray(expected, dtype=float)
    w = np.asarray(w, dtype=float)
    if P.shape != (e.size, w.size):
        raise InvariantError(f"marginals {P.shape} do not match {e.size} agents x {w.size} positions")
    return float(e @ P @ w)


def ndcg(utility: float, ideal_utility: float) -> float:
    if not ideal_utility > 0 or math.isnan(ideal_utility):
        raise InvariantError("ideal utility must be > 0")
    return utility / ideal_utility

"""Fairness audits of marginal rank matrices and exposure inequality."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantError


@dataclass(frozen=True, eq=False)
class FairnessReport:
    """Largest ``phi`` for which a policy is ``phi``-fair w.r.t. ``q``.

    ``binding`` lists the ``(agent, k)`` pairs attaining the minimum ratio,
    with ``k`` counted from 1.  ``slack[x, k-1]`` is
    ``P(x in top k) - phi_star * q[x, k-1]``.
    """

    phi_star: float
    binding: list
    slack: np.ndarray

    def to_dict(self) -> dict:
        return {
            "phi_star": self.phi_star,
            "binding": [{"agent": x, "k": k} for x, k in self.binding],
            "slack": self.slack.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data: dict) -> "FairnessReport":
        return cls(
            float(data["phi_star"]),
            [(int(b["agent"]), int(b["k"])) for b in data["binding"]],
            np.array(data["slack"], dtype=float),
        )


def fairness_level(P, q, binding_tol: float = 1e-12) -> FairnessReport:
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    if P.shape != q.shape:
        raise InvariantError(f"marginals {P.shape} and top-k matrix {q.shape} differ in shape")
    mask = q > 0
    if not mask.any():
        raise InvariantError("top-k matrix has no positive entry")
    placed = np.cumsum(P, axis=1)
    ratio = np.full(q.shape, np.inf)
    ratio[mask] = placed[mask] / q[mask]
    phi_star = float(ratio.min())
    binding = [(int(x), int(k) + 1) for x, k in np.argwhere(ratio <= phi_star + binding_tol)]
    return FairnessReport(phi_star, binding, placed - phi_star * q)


def is_phi_fair(P, q, phi: float, tol: float = 1e-9) -> bool:
    if phi <= 0:
        return True
    return fairness_level(P, q).phi_star >= phi - tol


def gini(exposure) -> float:
    """Mean absolute difference over all ordered pairs, halved and divided by the mean."""
    e = np.asarray(exposure, dtype=float).ravel()
    if e.size == 0 or np.any(e < 0):
        raise InvariantError("exposure must be a nonempty nonnegative vector")
    total = e.sum()
    if total <= 0:
        raise InvariantError("exposure is all zero")
    # sum_{i,j} |e_i - e_j| = 2 * sum_i (2i - n + 1) * e_(i) with e sorted ascending
    s = np.sort(e)
    n = s.size
    pair_sum = 2.0 * np.dot(2 * np.arange(n) - n + 1, s)
    return float(pair_sum / (2.0 * n * total))


def exposure_counts(rankings: Iterable[Sequence[int]], top_t: int, n: int | None = None) -> np.ndarray:
    """How many rankings place each agent within the first ``top_t`` positions."""
    arr = np.asarray(list(rankings), dtype=int)
    if arr.size == 0:
        if n is None:
            raise InvariantError("need n when no rankings are given")
        return np.zeros(n, dtype=int)
    n = arr.shape[1] if n is None else n
    if not 0 <= top_t <= arr.shape[1]:
        raise InvariantError(f"top_t must be in 0..{arr.shape[1]}")
    return np.bincount(arr[:, :top_t].ravel(), minlength=n)

"""Ranking policies and their marginal rank matrices.

A ranking is a tuple mapping position -> agent (0-based on both sides).
A marginal rank matrix ``P[x, k]`` is the probability that agent x is shown
at position k; it is doubly stochastic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvariantError
from .merit import MeritModel
from .topk import check_topk, rank_by_merit, sampled_position_counts

Ranking = tuple


def check_ranking(ranking: Sequence[int], n: int | None = None) -> Ranking:
    r = tuple(int(a) for a in ranking)
    if sorted(r) != list(range(len(r))) or (n is not None and len(r) != n):
        raise InvariantError(f"{r} is not a permutation of 0..{(n or len(r)) - 1}")
    return r


def check_doubly_stochastic(P, atol: float = 1e-9) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
        raise InvariantError(f"marginal matrix must be square and nonempty, got shape {P.shape}")
    if np.any(P < -atol) or np.any(P > 1 + atol):
        raise InvariantError("marginal probabilities must lie in [0, 1]")
    rows = np.abs(P.sum(axis=1) - 1) > atol
    if np.any(rows):
        x = int(np.argmax(rows))
        raise InvariantError(f"row {x} of the marginal matrix sums to {P[x].sum()!r}")
    cols = np.abs(P.sum(axis=0) - 1) > atol
    if np.any(cols):
        k = int(np.argmax(cols))
        raise InvariantError(f"column {k} of the marginal matrix sums to {P[:, k].sum()!r}")
    return P


def permutation_matrix(ranking: Sequence[int]) -> np.ndarray:
    n = len(ranking)
    P = np.zeros((n, n))
    P[list(ranking), np.arange(n)] = 1.0
    return P


@dataclass(frozen=True, eq=False)
class RankingDistribution:
    """A finite lottery over rankings."""

    rankings: tuple
    probs: np.ndarray

    def __init__(self, entries: Iterable[tuple[Sequence[int], float]]):
        entries = list(entries)
        if not entries:
            raise InvariantError("ranking distribution needs at least one entry")
        n = len(entries[0][0])
        rankings = tuple(check_ranking(r, n) for r, _ in entries)
        probs = np.array([float(p) for _, p in entries])
        if np.any(probs <= 0):
            raise InvariantError("lottery probabilities must be > 0")
        if abs(probs.sum() - 1) > 1e-9:
            raise InvariantError(f"lottery probabilities sum to {probs.sum()!r}")
        probs.setflags(write=False)
        object.__setattr__(self, "rankings", rankings)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self) -> int:
        return len(self.rankings[0])

    def __len__(self) -> int:
        return len(self.rankings)

    def __iter__(self):
        return iter(zip(self.rankings, self.probs.tolist()))

    def marginals(self) -> np.ndarray:
        return marginals_of_distribution(self)

    def sample(self, count: int, seed: int) -> list[Ranking]:
        rng = np.random.default_rng(seed)
        p = self.probs / self.probs.sum()
        return [self.rankings[i] for i in rng.choice(len(self), size=count, p=p)]

    def to_json(self) -> str:
        entries = [{"perm": list(r), "prob": p} for r, p in self]
        return json.dumps({"n": self.n, "entries": entries}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RankingDistribution":
        data = json.loads(text)
        dist = cls((e["perm"], e["prob"]) for e in data["entries"])
        if dist.n != data["n"]:
            raise InvariantError(f"lottery declares n={data['n']} but rankings have length {dist.n}")
        return dist


def opt_ranking(expected) -> Ranking:
    """Sort by nonincreasing expected merit; exact ties go to the lower index."""
    e = np.asarray(expected, dtype=float)
    return tuple(int(a) for a in np.lexsort((np.arange(e.size), -e)))


def ts_sample(model: MeritModel, seed: int) -> Ranking:
    """One Thompson-sampling ranking: draw merits, sort them descending."""
    rng = np.random.default_rng(seed)
    return tuple(int(a) for a in rank_by_merit(model.sample(1, rng), rng)[0])


def mixing_sample(model: MeritModel, phi: float, seed: int) -> Ranking:
    """With probability ``phi`` a Thompson ranking, otherwise the OPT ranking."""
    if not 0 <= phi <= 1:
        raise InvariantError("phi must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    if rng.random() < phi:
        return ts_sample(model, int(rng.integers(2**63)))
    return opt_ranking(model.expected())


def ts_marginals(q) -> np.ndarray:
    """Marginals of any 1-fair policy: first differences of q along k."""
    q = check_topk(q)
    return np.diff(q, axis=1, prepend=0.0)


def ts_empirical_marginals(model: MeritModel, m: int, seed: int) -> np.ndarray:
    """Position frequencies of ``m`` Thompson-sampled rankings."""
    return sampled_position_counts(model, m, seed) / m


def mixing_marginals(opt_marginals, ts_marg, phi: float) -> np.ndarray:
    if not 0 <= phi <= 1:
        raise InvariantError("phi must lie in [0, 1]")
    return (1 - phi) * np.asarray(opt_marginals) + phi * np.asarray(ts_marg)


def marginals_of_distribution(dist: RankingDistribution) -> np.ndarray:
    n = dist.n
    P = np.zeros((n, n))
    cols = np.arange(n)
    for r, p in zip(dist.rankings, dist.probs):
        P[list(r), cols] += p
    return P

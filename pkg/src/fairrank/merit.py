"""Posterior merit distributions.

Three models are provided, all immutable once built:

* :class:`EmpiricalMeritDistribution` - a finite list of joint merit vectors
  with probabilities.  The only model that can express correlation between
  agents, and the only one whose top-k probabilities are computed exactly.
* :class:`DirichletMultinomialModel` - one Dirichlet posterior per agent over
  the parameters of a rating multinomial on ``1..R``.  An agent's merit is the
  mean rating under the sampled multinomial.
* :class:`GaussianRelevanceModel` - independent normal relevance per agent.

Every model exposes ``n`` (agent count), ``expected()`` and
``sample(size, rng)``; the latter returns an array of shape ``(size, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvariantError


@dataclass(frozen=True, eq=False)
class EmpiricalMeritDistribution:
    support: np.ndarray  # (atoms, n) merit vectors
    probs: np.ndarray  # (atoms,)

    def __init__(self, support, probs):
        support = np.atleast_2d(np.asarray(support, dtype=float))
        probs = np.asarray(probs, dtype=float).ravel()
        if support.size == 0 or probs.size == 0:
            raise InvariantError("empirical distribution needs at least one atom")
        if support.shape[0] != probs.shape[0]:
            raise InvariantError(
                f"{support.shape[0]} support vectors but {probs.shape[0]} probabilities"
            )
        if not np.all(np.isfinite(support)):
            raise InvariantError("merits must be finite")
        if np.any(probs <= 0):
            raise InvariantError("atom probabilities must be > 0")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise InvariantError(f"atom probabilities sum to {probs.sum()!r}, not 1")
        support.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def independent(cls, marginals: Sequence[Sequence[tuple[float, float]]]):
        """Product distribution from per-agent ``[(value, prob), ...]`` lists."""
        support = [()]
        probs = [1.0]
        for agent in marginals:
            support = [s + (v,) for s in support for v, _ in agent]
            probs = [p * q for p in probs for _, q in agent]
        return cls(support, probs)

    @property
    def n(self) -> int:
        return self.support.shape[1]

    def expected(self) -> np.ndarray:
        return self.probs @ self.support

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(len(self.probs), size=size, p=self.probs)
        return self.support[idx]

    def transformed(self, fn) -> "EmpiricalMeritDistribution":
        """Apply ``fn`` elementwise to every support merit."""
        return EmpiricalMeritDistribution(fn(self.support.copy()), self.probs)


@dataclass(frozen=True, eq=False)
class DirichletMultinomialModel:
    alpha: np.ndarray  # (n, R) posterior pseudo-counts

    def __init__(self, alpha):
        alpha = np.atleast_2d(np.asarray(alpha, dtype=float))
        if alpha.shape[1] < 2:
            raise InvariantError("need at least two rating levels")
        if not np.all(alpha > 0):
            raise InvariantError("Dirichlet parameters must be > 0")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.alpha.shape[0]

    @property
    def levels(self) -> int:
        return self.alpha.shape[1]

    def expected(self) -> np.ndarray:
        ratings = np.arange(1, self.levels + 1)
        return (self.alpha @ ratings) / self.alpha.sum(axis=1)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        # Dirichlet via normalised gammas, vectorised over agents and draws.
        g = rng.standard_gamma(self.alpha, size=(size,) + self.alpha.shape)
        ratings = np.arange(1, self.levels + 1, dtype=float)
        return (g @ ratings) / g.sum(axis=2)


@dataclass(frozen=True, eq=False)
class GaussianRelevanceModel:
    mean: np.ndarray
    std: np.ndarray

    def __init__(self, mean, std):
        mean = np.asarray(mean, dtype=float).ravel()
        std = np.broadcast_to(np.asarray(std, dtype=float), mean.shape).copy()
        if not np.all(np.isfinite(mean)):
            raise InvariantError("means must be finite")
        if np.any(std < 0) or not np.all(np.isfinite(std)):
            raise InvariantError("standard deviations must be finite and >= 0")
        mean.setflags(write=False)
        std.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @property
    def n(self) -> int:
        return self.mean.shape[0]

    def expected(self) -> np.ndarray:
        return self.mean.copy()

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.mean + self.std * rng.standard_normal((size, self.n))


MeritModel = Union[EmpiricalMeritDistribution, DirichletMultinomialModel, GaussianRelevanceModel]


def sample_merits(model: MeritModel, seed: int) -> np.ndarray:
    """One draw of the joint merit vector, reproducible from ``seed``."""
    return model.sample(1, np.random.default_rng(seed))[0]


def expected_merits(model: MeritModel) -> np.ndarray:
    return model.expected()


def dirichlet_posterior_from_counts(prior, counts) -> DirichletMultinomialModel:
    """Conjugate update: posterior pseudo-counts are ``prior + counts``.

    ``prior`` may be one vector (shared by every agent) or one row per agent;
    ``counts`` is one row of rating counts per agent.
    """
    prior = np.asarray(prior, dtype=float)
    counts = np.atleast_2d(np.asarray(counts))
    if prior.shape[-1] != counts.shape[-1]:
        raise InvariantError(
            f"prior has {prior.shape[-1]} rating levels, counts have {counts.shape[-1]}"
        )
    if np.any(counts < 0) or not np.all(np.equal(np.mod(counts, 1), 0)):
        raise InvariantError("counts must be nonnegative integers")
    return DirichletMultinomialModel(prior + counts)


def dirichlet_expected_merit(model: DirichletMultinomialModel, agent: int) -> float:
    """Posterior mean rating of one agent."""
    a = model.alpha[agent]
    return float(np.arange(1, len(a) + 1) @ a / a.sum())


def scaled_prior(rating_marginals, s: float = 1.0) -> np.ndarray:
    """Prior pseudo-counts ``s * p_r`` from marginal rating frequencies."""
    p = np.asarray(rating_marginals, dtype=float)
    p = p / p.sum()
    return s * p


def gaussian_sigma_calibration(scores, gamma: float = 2.0, epsilon: float = 0.1) -> np.ndarray:
    """Per-item standard deviation so that ``max_u S[u, i] + gamma * sigma_i = 1 + epsilon``.

    ``scores`` is a users x items matrix.  Negative results are clamped at 0.
    """
    if gamma <= 0:
        raise InvariantError("gamma must be > 0")
    if epsilon <= 0:
        raise InvariantError("epsilon must be > 0")
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    if not np.all(np.isfinite(scores)):
        raise InvariantError("scores must be finite")
    sigma = (1.0 + epsilon - scores.max(axis=0)) / gamma
    return np.maximum(sigma, 0.0)

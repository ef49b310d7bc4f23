"""Independent oracles and random-instance generators shared by the tests.

Nothing here calls into the code paths being checked.
"""

from itertools import permutations

import numpy as np

from fairrank.merit import EmpiricalMeritDistribution


def brute_force_topk(support, probs):
    """Top-k matrix by enumerating every ordering consistent with each atom.

    Tied agents are ordered by each of the consistent permutations with
    equal probability, which is what uniform tie-breaking means.
    """
    support = np.asarray(support, dtype=float)
    n = support.shape[1]
    q = np.zeros((n, n))
    for v, p in zip(support, probs):
        orders = [o for o in permutations(range(n))
                  if all(v[o[i]] >= v[o[i + 1]] for i in range(n - 1))]
        for o in orders:
            for pos, agent in enumerate(o):
                q[agent, pos:] += p / len(orders)
    return q


def brute_force_policy_utility(lottery, merits, w):
    return sum(p * sum(w[k] * merits[a] for k, a in enumerate(r)) for r, p in lottery)


def pairwise_gini(e):
    e = [float(x) for x in e]
    n = len(e)
    mean = sum(e) / n
    return sum(abs(a - b) for a in e for b in e) / (2 * n * n * mean)


def random_empirical(n, rng, atoms=None, tie_prob=0.3):
    """Random finite nonnegative merit distribution; integer merits (hence ties) some of the time."""
    atoms = atoms or int(rng.integers(2, 8))
    if rng.random() < tie_prob:
        support = rng.integers(0, 4, size=(atoms, n)).astype(float)
    else:
        support = rng.random(size=(atoms, n))
    probs = rng.dirichlet(np.ones(atoms))
    probs /= probs.sum()
    return EmpiricalMeritDistribution(support, probs)


def random_doubly_stochastic(n, rng, terms=None):
    terms = terms or int(rng.integers(1, 21))
    weights = rng.dirichlet(np.ones(terms))
    M = np.zeros((n, n))
    for lam in weights:
        M[rng.permutation(n), np.arange(n)] += lam
    return M


def perturb_columns(q, eps, rng):
    """Add noise of magnitude <= eps to every entry, keeping column sums."""
    out = q.copy()
    n = q.shape[0]
    for k in range(n):
        u = rng.uniform(-eps, eps, size=n)
        u -= u.mean()
        big = np.abs(u).max()
        if big > eps:
            u *= eps / big
        out[:, k] += u
    return out

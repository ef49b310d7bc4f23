"""Utility-maximising phi-fair marginal rank matrices.

Variables are the entries of the marginal matrix ``P[x, k]`` in row-major
order.  The LP maximises ``sum_x sum_k P[x, k] * E[v_x] * w[k]`` subject to

* ``sum_{k' <= k} P[x, k'] >= phi * q[x, k]`` for every agent and position,
* every row and every column of ``P`` summing to one,
* ``0 <= P <= 1``.

Two backends are available: scipy's HiGHS dual simplex (default) and the
dense Bland's-rule tableau in :mod:`fairrank.simplex`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .bvn import bvn_decompose
from .errors import InvariantError, SolverError
from .policies import RankingDistribution, ts_marginals
from .simplex import simplex
from .topk import check_topk
from .utility import check_weights, policy_utility


@dataclass(frozen=True, eq=False)
class FairLpInstance:
    q: np.ndarray
    expected: np.ndarray
    weights: np.ndarray
    phi: float

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def objective(self) -> np.ndarray:
        """Per-entry utility coefficients ``E[v_x] * w[k]`` as an n x n matrix."""
        return np.outer(self.expected, self.weights)

    @property
    def rhs(self) -> np.ndarray:
        return self.phi * self.q

    def constraints(self):
        """``(A_ub, b_ub, A_eq, b_eq)`` as sparse matrices, ``<=`` form."""
        n = self.n
        eye = sparse.identity(n, format="csr")
        lower = sparse.csr_matrix(np.tril(np.ones((n, n))))
        # row x*n+k of the cumulative operator sums P[x, :k+1]
        cumulative = sparse.kron(eye, lower, format="csr")
        A_ub = -cumulative
        b_ub = -self.rhs.ravel()
        rows = sparse.kron(eye, np.ones((1, n)), format="csr")
        cols = sparse.kron(np.ones((1, n)), eye, format="csr")
        A_eq = sparse.vstack([rows, cols], format="csr")
        b_eq = np.ones(2 * n)
        return A_ub, b_ub, A_eq, b_eq


def build_lp(q, expected, w, phi: float) -> FairLpInstance:
    if not 0 <= phi <= 1:
        raise InvariantError(f"phi must lie in [0, 1], got {phi}")
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise InvariantError(f"top-k matrix must be square, got shape {q.shape}")
    # estimated or robustified matrices need not be valid top-k matrices
    # (column sums drift, entries may overshoot 1), so only finiteness is required
    if not np.all(np.isfinite(q)):
        raise InvariantError("top-k matrix must be finite")
    expected = np.asarray(expected, dtype=float).ravel()
    w = check_weights(w)
    n = q.shape[0]
    if expected.size != n or w.size != n:
        raise InvariantError(
            f"dimension mismatch: q is {n}x{n}, {expected.size} merits, {w.size} weights"
        )
    if not np.all(np.isfinite(expected)):
        raise InvariantError("expected merits must be finite")
    return FairLpInstance(q, expected, w, float(phi))


def _clean(P: np.ndarray) -> np.ndarray:
    P = np.clip(P, 0.0, 1.0)
    P[P < 1e-13] = 0.0
    return P


def solve_lp(instance: FairLpInstance, method: str = "highs", max_iter: int = 100_000,
             tol: float = 1e-10) -> np.ndarray:
    """Optimal marginal rank matrix of ``instance``.

    At ``phi == 1`` with a valid top-k matrix the feasible region is a single
    point and it is returned without calling a solver.
    """
    n = instance.n
    if instance.phi == 1.0:
        try:
            return ts_marginals(check_topk(instance.q))
        except InvariantError:
            pass
    A_ub, b_ub, A_eq, b_eq = instance.constraints()
    c = -instance.objective.ravel()
    if method == "highs":
        res = linprog(
            c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, 1),
            method="highs-ds",
            options={"maxiter": max_iter, "primal_feasibility_tolerance": tol,
                     "dual_feasibility_tolerance": tol},
        )
        if res.status == 2:
            raise SolverError("fairness LP is infeasible")
        if res.status != 0:
            raise SolverError(f"HiGHS failed: {res.message}")
        x = res.x
    elif method == "simplex":
        # upper bounds are implied by the row sums, so only x >= 0 is needed
        res = simplex(c, A_ub.toarray(), b_ub, A_eq.toarray(), b_eq, max_iter=max_iter)
        x = res.x
    else:
        raise InvariantError(f"unknown LP method {method!r}")
    return _clean(x.reshape(n, n))


def lp_objective(instance: FairLpInstance, P) -> float:
    return policy_utility(P, instance.expected, instance.weights)


def lp_policy(q, expected, w, phi: float, method: str = "highs",
              zero_tol: float = 1e-9) -> RankingDistribution:
    """Solve the fair LP and turn its solution into a lottery over rankings."""
    P = solve_lp(build_lp(q, expected, w, phi), method=method)
    return bvn_decompose(P, zero_tol=zero_tol)

"""Dense two-phase tableau simplex with Bland's rule.

Slow but simple and exact up to round-off; meant for small instances and as
an independent check on the HiGHS path.  Solves

    minimize c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int


def _pivot(T: np.ndarray, basis: list, row: int, col: int) -> None:
    T[row] /= T[row, col]
    others = np.nonzero(T[:, col])[0]
    for r in others:
        if r != row:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _run(T, basis, m, allowed, tol, max_iter, it):
    """Bland's-rule iterations; rows ``:m`` are constraints, row ``m`` the reduced cost."""
    cost_row = m
    while True:
        if it >= max_iter:
            raise SolverError(f"simplex hit the iteration limit ({max_iter})")
        reduced = T[cost_row, :-1]
        candidates = np.nonzero((reduced < -tol) & allowed)[0]
        if candidates.size == 0:
            return it
        col = int(candidates[0])
        column = T[:m, col]
        pos = column > tol
        if not pos.any():
            raise SolverError("LP is unbounded")
        ratios = np.full(m, np.inf)
        ratios[pos] = T[:m, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + tol * max(1.0, abs(best)))[0]
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
        it += 1


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-11,
            max_iter: int = 50_000) -> SimplexResult:
    c = np.asarray(c, dtype=float)
    nvar = c.size
    A_ub = np.zeros((0, nvar)) if A_ub is None else np.asarray(A_ub, dtype=float)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, nvar)) if A_eq is None else np.asarray(A_eq, dtype=float)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]
    m = n_ub + n_eq

    # columns: originals | slacks | artificials | rhs
    A = np.zeros((m, nvar + n_ub))
    A[:n_ub, :nvar] = A_ub
    A[:n_ub, nvar:] = np.eye(n_ub)
    A[n_ub:, :nvar] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b = np.abs(b)

    ncol = nvar + n_ub + m
    T = np.zeros((m + 2, ncol + 1))
    T[:m, : nvar + n_ub] = A
    T[:m, nvar + n_ub : ncol] = np.eye(m)
    T[:m, -1] = b
    T[m, :nvar] = c  # phase-2 cost, kept up to date during phase 1
    T[m + 1, : nvar + n_ub] = -A.sum(axis=0)  # phase-1 cost (sum of artificials)
    T[m + 1, -1] = -b.sum()
    basis = list(range(nvar + n_ub, ncol))

    # phase 1 works on the phase-1 cost row; the phase-2 row rides along
    T1 = np.vstack([T[:m], T[m + 1 : m + 2], T[m : m + 1]])
    allowed = np.ones(ncol, dtype=bool)
    it = _run(T1, basis, m, allowed, tol, max_iter, 0)
    if -T1[m, -1] > 1e-8 * max(1.0, b.sum()):
        raise SolverError("LP is infeasible")

    # drive artificials out of the basis; drop redundant rows
    art = set(range(nvar + n_ub, ncol))
    keep = []
    for r in range(m):
        if basis[r] in art:
            cand = np.nonzero(np.abs(T1[r, : nvar + n_ub]) > 1e-9)[0]
            if cand.size:
                _pivot(T1, basis, r, int(cand[0]))
                keep.append(r)
        else:
            keep.append(r)
    T2 = np.vstack([T1[keep], T1[m + 1 : m + 2]])
    basis = [basis[r] for r in keep]
    allowed = np.zeros(ncol, dtype=bool)
    allowed[: nvar + n_ub] = True
    it = _run(T2, basis, len(keep), allowed, tol, max_iter, it)

    x = np.zeros(ncol)
    x[basis] = T2[: len(keep), -1]
    x = x[:nvar]
    return SimplexResult(x=x, fun=float(c @ x), iterations=it)

"""Birkhoff-von Neumann decomposition of a doubly stochastic matrix."""

from __future__ import annotations

import numpy as np

from .errors import SolverError
from .policies import RankingDistribution, check_doubly_stochastic

# leftover mass below this is attributed to round-off in the input
RESIDUAL_TOL = 1e-6


def _augment(row, adj, col_owner, row_col, seen) -> bool:
    # iterative Kuhn augmenting-path search from an unmatched row
    stack = [(row, iter(adj[row]))]
    path = []
    while stack:
        r, it = stack[-1]
        advanced = False
        for c in it:
            if seen[c]:
                continue
            seen[c] = True
            owner = col_owner[c]
            path.append((r, c))
            if owner < 0:
                for pr, pc in path:
                    col_owner[pc] = pr
                    row_col[pr] = pc
                return True
            stack.append((owner, iter(adj[owner])))
            advanced = True
            break
        if not advanced:
            stack.pop()
            if path:
                path.pop()
    return False


def perfect_matching(support: np.ndarray, row_col: np.ndarray | None = None) -> np.ndarray | None:
    """Perfect matching row -> column on a boolean support, or None.

    ``row_col`` may carry a previous matching; pairs still in the support are
    kept and only the broken rows are re-augmented.
    """
    n = support.shape[0]
    adj = [np.flatnonzero(support[r]).tolist() for r in range(n)]
    if row_col is None:
        row_col = np.full(n, -1)
    else:
        row_col = row_col.copy()
        broken = (row_col >= 0) & ~support[np.arange(n), np.maximum(row_col, 0)]
        row_col[broken] = -1
    col_owner = np.full(n, -1)
    matched = row_col >= 0
    col_owner[row_col[matched]] = np.flatnonzero(matched)
    for r in np.flatnonzero(row_col < 0):
        if not _augment(int(r), adj, col_owner, row_col, np.zeros(n, dtype=bool)):
            return None
    return row_col


def bvn_decompose(M, zero_tol: float = 1e-9) -> RankingDistribution:
    """Write ``M`` as a lottery over rankings.

    Repeatedly picks a perfect matching on the entries above ``zero_tol`` and
    subtracts the smallest matched entry.  Each step empties at least one
    entry, giving at most ``n**2 - 2n + 2`` rankings.
    """
    M = check_doubly_stochastic(M, atol=1e-7)
    n = M.shape[0]
    R = np.where(M > zero_tol, M, 0.0)
    rows = np.arange(n)
    entries = []
    match = None
    while True:
        support = R > 0
        if not support.any():
            break
        match = perfect_matching(support, match)
        if match is None:
            if R.max() <= RESIDUAL_TOL:
                break
            raise SolverError(
                f"no perfect matching on the support with residual mass {R.sum():.3g}; "
                "matrix is not doubly stochastic"
            )
        vals = R[rows, match]
        theta = vals.min()
        rest = vals - theta
        rest[rest <= zero_tol] = 0.0
        R[rows, match] = rest
        ranking = np.empty(n, dtype=int)
        ranking[match] = rows  # agent x sits at position match[x]
        entries.append((ranking, theta))
    total = sum(p for _, p in entries)
    return RankingDistribution((r, p / total) for r, p in entries)

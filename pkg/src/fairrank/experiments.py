"""Tradeoff experiments on rating data and exposure experiments on relevance scores."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audit import exposure_counts, fairness_level, gini
from .bvn import bvn_decompose
from .errors import DataError, InvariantError
from .lp import build_lp, lp_objective, solve_lp
from .merit import dirichlet_posterior_from_counts, gaussian_sigma_calibration, scaled_prior
from .policies import opt_ranking, permutation_matrix, ts_marginals
from .topk import monte_carlo_topk, rank_by_merit
from .utility import make_weights, policy_utility

log = logging.getLogger(__name__)

ML100K_GENRES = (
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery",
    "Romance", "Sci-Fi", "Thriller", "War", "Western",
)
# rating counts 1..5 in the full ML-100K u.data
ML100K_RATING_COUNTS = (6110, 11370, 27145, 34174, 21201)

DEFAULT_PHI_GRID = tuple(round(0.1 * i, 10) for i in range(11))


@dataclass(eq=False)
class RatingsDataset:
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    timestamps: np.ndarray
    item_genres: dict  # item id -> frozenset of genre names
    levels: int = 5
    true_merits: dict | None = None  # item id -> mean rating, synthetic data only

    def __len__(self) -> int:
        return len(self.ratings)

    def rating_marginals(self) -> np.ndarray:
        counts = np.bincount(self.ratings, minlength=self.levels + 1)[1:]
        return counts / counts.sum()

    def genre_items(self, genre: str) -> np.ndarray:
        rated = np.unique(self.items)
        return np.array([i for i in rated if genre in self.item_genres.get(int(i), ())], dtype=int)

    def rating_counts(self, item_ids, mask=None) -> np.ndarray:
        """Per-item rating histograms, rows aligned with ``item_ids``."""
        items, ratings = self.items, self.ratings
        if mask is not None:
            items, ratings = items[mask], ratings[mask]
        pos = {int(i): j for j, i in enumerate(item_ids)}
        out = np.zeros((len(pos), self.levels), dtype=int)
        keep = np.isin(items, item_ids)
        rows = np.array([pos[int(i)] for i in items[keep]], dtype=int)
        np.add.at(out, (rows, ratings[keep] - 1), 1)
        return out


def load_movielens(ratings_path, items_path, levels: int = 5) -> RatingsDataset:
    """Read ML-100K ``u.data`` and ``u.item``."""
    ratings_path, items_path = Path(ratings_path), Path(items_path)
    rows = []
    try:
        with open(ratings_path, encoding="latin-1") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.split("\t")
                try:
                    u, i, r, t = (int(p) for p in parts)
                except ValueError:
                    raise DataError(f"{ratings_path}:{lineno}: expected 4 tab-separated integers") from None
                if not 1 <= r <= levels or u < 0 or i < 0:
                    raise DataError(f"{ratings_path}:{lineno}: rating {r} outside 1..{levels}")
                rows.append((u, i, r, t))
    except OSError as exc:
        raise DataError(f"cannot read {ratings_path}: {exc}") from exc
    if not rows:
        raise DataError(f"{ratings_path} contains no ratings")

    genres = {}
    try:
        with open(items_path, encoding="latin-1") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                parts = line.rstrip("\r\n").split("|")
                flags = parts[5:]
                if len(flags) != len(ML100K_GENRES):
                    raise DataError(
                        f"{items_path}:{lineno}: expected {len(ML100K_GENRES)} genre flags, got {len(flags)}"
                    )
                try:
                    item = int(parts[0])
                    genres[item] = frozenset(g for g, f in zip(ML100K_GENRES, flags) if int(f))
                except ValueError:
                    raise DataError(f"{items_path}:{lineno}: malformed item line") from None
    except OSError as exc:
        raise DataError(f"cannot read {items_path}: {exc}") from exc
    if not genres:
        raise DataError(f"{items_path} contains no items")

    arr = np.array(rows, dtype=np.int64)
    return RatingsDataset(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], genres, levels)


def synthesize_ratings(params, ratings_per_item: int, seed: int, item_genres=None) -> RatingsDataset:
    """I.i.d. multinomial ratings from known per-item rating distributions.

    ``params`` is an items x levels array of probabilities; item ids are row
    indices.  The true mean rating of each item is kept in ``true_merits``.
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    if np.any(params < 0) or np.any(np.abs(params.sum(axis=1) - 1) > 1e-9):
        raise InvariantError("rating parameters must be probability vectors")
    n_items, levels = params.shape
    rng = np.random.default_rng(seed)
    counts = np.array([rng.multinomial(ratings_per_item, p) for p in params])
    items = np.repeat(np.arange(n_items), ratings_per_item)
    ratings = np.concatenate([np.repeat(np.arange(1, levels + 1), c) for c in counts])
    order = rng.permutation(len(ratings))
    items, ratings = items[order], ratings[order]
    users = rng.integers(0, 1000, size=len(ratings))
    stamps = np.arange(len(ratings), dtype=np.int64)
    truth = params @ np.arange(1, levels + 1)
    if item_genres is None:
        item_genres = {i: frozenset() for i in range(n_items)}
    return RatingsDataset(users, items, ratings, stamps, dict(item_genres), levels,
                          {i: float(truth[i]) for i in range(n_items)})


def synthetic_movielens(n_genres: int = 18, items_per_genre: int = 40, ratings_per_item: int = 60,
                        concentration: float = 10.0, seed: int = 0) -> RatingsDataset:
    """Stand-in for ML-100K: disjoint pseudo-genres named after the real ones.

    Each item's true rating distribution is drawn around the ML-100K rating
    marginals; ``ratings_per_item`` = 60 matches the ML-100K average.
    """
    if not 1 <= n_genres <= len(ML100K_GENRES) - 1:
        raise InvariantError(f"n_genres must be in 1..{len(ML100K_GENRES) - 1}")
    rng = np.random.default_rng(seed)
    base = np.array(ML100K_RATING_COUNTS, dtype=float)
    base /= base.sum()
    n_items = n_genres * items_per_genre
    params = rng.dirichlet(concentration * base, size=n_items)
    names = ML100K_GENRES[1 : n_genres + 1]
    genres = {i: frozenset({names[i // items_per_genre]}) for i in range(n_items)}
    return synthesize_ratings(params, ratings_per_item, int(rng.integers(2**31)), genres)


@dataclass(eq=False)
class TradeoffTable:
    phi: np.ndarray
    lp_utility: np.ndarray
    mixing_utility: np.ndarray
    lp_ndcg: np.ndarray
    mixing_ndcg: np.ndarray
    lp_phi_star: np.ndarray
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("phi", "lp_utility", "mixing_utility", "lp_ndcg", "mixing_ndcg", "lp_phi_star")

    def __post_init__(self):
        for c in self.COLUMNS:
            setattr(self, c, np.asarray(getattr(self, c), dtype=float).ravel())
        if len({getattr(self, c).size for c in self.COLUMNS}) != 1:
            raise InvariantError("tradeoff columns differ in length")
        if np.any(np.diff(self.phi) < 0):
            raise InvariantError("phi grid must be sorted ascending")

    def __len__(self) -> int:
        return self.phi.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, TradeoffTable):
            return NotImplemented
        return self.metadata == other.metadata and all(
            np.array_equal(getattr(self, c), getattr(other, c)) for c in self.COLUMNS
        )

    def rows(self):
        return zip(*(getattr(self, c).tolist() for c in self.COLUMNS))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.COLUMNS)
        for row in self.rows():
            writer.writerow([f"{v:.10g}" for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        data = {c: getattr(self, c).tolist() for c in self.COLUMNS}
        data["metadata"] = self.metadata
        return json.dumps(data, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TradeoffTable":
        data = json.loads(text)
        return cls(*(data[c] for c in cls.COLUMNS), metadata=data.get("metadata", {}))


def tradeoff_curve(q, expected, w, phi_grid=DEFAULT_PHI_GRID, method: str = "highs",
                   metadata: dict | None = None) -> TradeoffTable:
    """LP versus OPT/TS mixing on one instance, over a grid of phi.

    NDCG is relative to the OPT ranking's expected utility.  ``lp_phi_star``
    audits the BvN lottery actually produced, not the raw LP matrix.
    """
    phi_grid = sorted(float(p) for p in phi_grid)
    q = np.asarray(q, dtype=float)
    expected = np.asarray(expected, dtype=float)
    w = np.asarray(w, dtype=float)
    opt = permutation_matrix(opt_ranking(expected))
    ts = ts_marginals(q)
    u_opt = policy_utility(opt, expected, w)
    u_ts = policy_utility(ts, expected, w)
    cols = {c: [] for c in TradeoffTable.COLUMNS}
    for phi in phi_grid:
        inst = build_lp(q, expected, w, phi)
        P = solve_lp(inst, method=method)
        lottery = bvn_decompose(P)
        u_lp = lp_objective(inst, P)
        u_mix = (1 - phi) * u_opt + phi * u_ts
        cols["phi"].append(phi)
        cols["lp_utility"].append(u_lp)
        cols["mixing_utility"].append(u_mix)
        cols["lp_ndcg"].append(u_lp / u_opt if u_opt > 0 else math.nan)
        cols["mixing_ndcg"].append(u_mix / u_opt if u_opt > 0 else math.nan)
        cols["lp_phi_star"].append(fairness_level(lottery.marginals(), q).phi_star)
    return TradeoffTable(**cols, metadata=dict(metadata or {}))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FAIRRANK_THREADS", "1")))
    except ValueError:
        return 1


def _genre_run(dataset, pool, prior, n_items, subsample, phi_grid, mc_samples, seed, method):
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(pool, size=n_items, replace=False))
    keep = rng.random(len(dataset)) < subsample
    counts = dataset.rating_counts(chosen, keep)
    model = dirichlet_posterior_from_counts(prior, counts)
    q = monte_carlo_topk(model, mc_samples, int(rng.integers(2**63)))
    w = make_weights("dcg", n_items)
    return tradeoff_curve(q, model.expected(), w, phi_grid, method)


def genre_experiment(dataset: RatingsDataset, genre: str = "Comedy", n_items: int = 40,
                     subsample: float = 0.10, s: float = 1.0, phi_grid=DEFAULT_PHI_GRID,
                     mc_samples: int = 50_000, runs: int = 20, seed: int = 0,
                     method: str = "highs") -> TradeoffTable:
    """Average LP/mixing tradeoff over ``runs`` random item subsets and rating subsamples.

    The Dirichlet prior is ``s`` times the rating marginals of the full
    dataset; posteriors use only the subsample.  ``lp_phi_star`` is the
    worst audited level across runs.
    """
    pool = dataset.genre_items(genre)
    if len(pool) < n_items:
        raise InvariantError(f"genre {genre!r} has {len(pool)} rated items, need {n_items}")
    if not 0 < subsample <= 1:
        raise InvariantError("subsample must lie in (0, 1]")
    prior = scaled_prior(dataset.rating_marginals(), s)
    seeds = np.random.SeedSequence(seed).generate_state(runs, dtype=np.uint64).tolist()
    args = (dataset, pool, prior, n_items, subsample, phi_grid, mc_samples)

    def one(run_seed):
        return _genre_run(*args, run_seed, method)

    workers = min(_threads(), runs)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            tables = list(ex.map(one, seeds))
    else:
        tables = []
        for i, sd in enumerate(seeds):
            log.info("genre %s: run %d/%d", genre, i + 1, runs)
            tables.append(one(sd))

    stacked = {c: np.stack([getattr(t, c) for t in tables]) for c in TradeoffTable.COLUMNS}
    cols = {c: stacked[c].mean(axis=0) for c in TradeoffTable.COLUMNS}
    cols["phi"] = tables[0].phi
    cols["lp_phi_star"] = stacked["lp_phi_star"].min(axis=0)
    meta = {"seed": seed, "genre": genre, "n": n_items, "subsample": subsample, "s": s,
            "runs": runs, "mc_samples": mc_samples}
    return TradeoffTable(**cols, metadata=meta)


@dataclass(eq=False)
class ExposureResult:
    """Top-T exposure per item under the OPT and Thompson-sampling arms."""

    opt_counts: np.ndarray
    ts_counts: np.ndarray
    sigma: np.ndarray
    top_t: int

    @property
    def opt_gini(self) -> float:
        return gini(self.opt_counts)

    @property
    def ts_gini(self) -> float:
        return gini(self.ts_counts)

    @property
    def opt_unexposed(self) -> int:
        return int(np.sum(self.opt_counts == 0))

    @property
    def ts_unexposed(self) -> int:
        return int(np.sum(self.ts_counts == 0))

    def histograms(self, bins: int = 10):
        top = max(self.opt_counts.max(), self.ts_counts.max(), 1)
        edges = np.linspace(0, top, bins + 1)
        return (np.histogram(self.opt_counts, edges)[0], np.histogram(self.ts_counts, edges)[0], edges)

    def to_dict(self) -> dict:
        h_opt, h_ts, edges = self.histograms()
        return {
            "top_t": self.top_t,
            "opt": {"gini": self.opt_gini, "unexposed": self.opt_unexposed,
                    "counts": self.opt_counts.tolist(), "histogram": h_opt.tolist()},
            "ts": {"gini": self.ts_gini, "unexposed": self.ts_unexposed,
                   "counts": self.ts_counts.tolist(), "histogram": h_ts.tolist()},
            "bin_edges": edges.tolist(),
            "sigma": self.sigma.tolist(),
        }


def relevance_experiment(scores, gamma: float = 2.0, epsilon: float = 0.1, users_per_arm: int = 200,
                         top_t: int = 5, seed: int = 0) -> ExposureResult:
    """Randomly split users into an OPT arm and a Thompson-sampling arm.

    OPT users see items by decreasing score; TS users see items by one
    Gaussian draw per item around their scores, with per-item spread
    calibrated from the score matrix.
    """
    S = np.atleast_2d(np.asarray(scores, dtype=float))
    if np.any(S < 0) or np.any(S > 1):
        raise InvariantError("relevance scores must lie in [0, 1]")
    n_users, n_items = S.shape
    if n_users < 2 * users_per_arm:
        raise InvariantError(f"need {2 * users_per_arm} users for two arms, have {n_users}")
    if not 0 <= top_t <= n_items:
        raise InvariantError(f"top_t must be in 0..{n_items}")
    sigma = gaussian_sigma_calibration(S, gamma, epsilon)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_users)
    opt_users, ts_users = perm[:users_per_arm], perm[users_per_arm : 2 * users_per_arm]
    opt_rankings = [opt_ranking(S[u]) for u in opt_users]
    draws = S[ts_users] + sigma * rng.standard_normal((users_per_arm, n_items))
    ts_rankings = rank_by_merit(draws, rng)
    return ExposureResult(
        exposure_counts(opt_rankings, top_t, n_items),
        exposure_counts(ts_rankings, top_t, n_items),
        sigma,
        top_t,
    )


def synthetic_scores(n_users: int = 400, n_items: int = 100, n_topics: int = 8,
                     seed: int = 0) -> np.ndarray:
    """Users x items relevance in [0, 1] with very different per-item maxima.

    Users and items get topic mixtures; an item's best achievable score is an
    item-specific ceiling drawn from U(0.1, 1).
    """
    rng = np.random.default_rng(seed)
    users = rng.dirichlet(np.full(n_topics, 0.3), size=n_users)
    items = rng.dirichlet(np.full(n_topics, 0.3), size=n_items)
    affinity = users @ items.T
    affinity /= affinity.max(axis=0, keepdims=True)
    ceiling = rng.uniform(0.1, 1.0, size=n_items)
    return affinity * ceiling


def export_results(table: TradeoffTable, fmt: str, path) -> Path:
    path = Path(path)
    try:
        if fmt == "csv":
            path.write_text(table.to_csv())
        elif fmt == "json":
            path.write_text(table.to_json())
        elif fmt in ("svg", "svg_line_plot"):
            from .plotting import tradeoff_figure

            tradeoff_figure(table, path)
        else:
            raise InvariantError(f"unknown export format {fmt!r}")
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc
    return path

"""Acceptance criteria, one test per criterion.

Each test records a ``[PASS]``/``[FAIL]`` line that is printed during the run
and repeated in the terminal summary.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

import conftest
from fairrank.audit import fairness_level
from fairrank.bvn import bvn_decompose
from fairrank.experiments import (
    genre_experiment,
    load_movielens,
    relevance_experiment,
    synthetic_movielens,
    synthetic_scores,
    tradeoff_curve,
)
from fairrank.fixtures import EXAMPLE2_WEIGHTS, example2_distribution, example2_opt_lottery
from fairrank.lp import build_lp, lp_objective, solve_lp
from fairrank.policies import ts_empirical_marginals, ts_marginals
from fairrank.topk import dkw_sample_size, exact_topk, monte_carlo_topk, robustify
from fairrank.utility import make_weights

from helpers import perturb_columns, random_doubly_stochastic, random_empirical

EXAMPLE2_Q = np.array([[14, 22, 24], [5, 13, 24], [5, 13, 24]]) / 24
E2 = np.array([1.0, 0.5, 0.5])
GRID = [round(0.05 * i, 2) for i in range(21)]


def record(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] AC{number}: {detail}"
    conftest.ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_ac1_example2_topk():
    t0 = time.perf_counter()
    q = exact_topk(example2_distribution())
    elapsed = time.perf_counter() - t0
    err = np.abs(q - EXAMPLE2_Q).max()
    record(1, err <= 1e-12 and elapsed < 1, f"Example 2 top-k max error {err:.2e}, {elapsed:.3f}s")


def test_ac2_opt_audit():
    phi = fairness_level(example2_opt_lottery().marginals(), exact_topk(example2_distribution())).phi_star
    record(2, abs(phi - 6 / 7) <= 1e-12, f"OPT lottery phi* = {phi:.15f} (6/7 = {6 / 7:.15f})")


def test_ac3_lp_endpoints():
    q = exact_topk(example2_distribution())
    lo = build_lp(q, E2, EXAMPLE2_WEIGHTS, 0)
    hi = build_lp(q, E2, EXAMPLE2_WEIGHTS, 1)
    u0 = lp_objective(lo, solve_lp(lo))
    P1 = solve_lp(hi)
    u1 = lp_objective(hi, P1)
    dev = np.abs(P1 - ts_marginals(q)).max()
    ok = abs(u0 - 1.5) <= 1e-9 and abs(u1 - 35 / 24) <= 1e-9 and dev <= 1e-8
    record(3, ok, f"objective {u0:.12f} at phi=0, {u1:.12f} at phi=1, |P - TS| = {dev:.1e}")


def _curve_ok(table):
    lp, mix = table.lp_utility, table.mixing_utility
    dominance = np.all(lp >= mix - 1e-9)
    endpoints = abs(lp[0] - mix[0]) <= 1e-9 and abs(lp[-1] - mix[-1]) <= 1e-9
    monotone = np.all(np.diff(lp) <= 1e-9)
    return dominance and endpoints and monotone


def test_ac4_dominance_curve():
    t0 = time.perf_counter()
    tables = [tradeoff_curve(exact_topk(example2_distribution()), E2, EXAMPLE2_WEIGHTS, GRID)]
    rng = np.random.default_rng(4)
    w = make_weights("dcg", 5)
    for _ in range(50):
        d = random_empirical(5, rng)
        tables.append(tradeoff_curve(exact_topk(d), d.expected(), w, GRID))
    elapsed = time.perf_counter() - t0
    good = sum(_curve_ok(t) for t in tables)
    record(4, good == 51 and elapsed < 30, f"{good}/51 curves dominate mixing and are monotone, {elapsed:.1f}s")


def test_ac5_bvn():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    worst, good = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(1, 13))
        M = random_doubly_stochastic(n, rng, terms=int(rng.integers(1, 21)))
        lottery = bvn_decompose(M)
        err = np.abs(lottery.marginals() - M).max()
        worst = max(worst, err)
        good += err <= 1e-8 and len(lottery) <= n * n - 2 * n + 2
    elapsed = time.perf_counter() - t0
    record(5, good == 200 and elapsed < 30,
           f"{good}/200 decompositions exact and sparse, worst error {worst:.1e}, {elapsed:.1f}s")


def test_ac6_ts_one_fair():
    d = example2_distribution()
    q = exact_topk(d)
    empirical = fairness_level(ts_empirical_marginals(d, 200_000, 6), q).phi_star
    exact = fairness_level(ts_marginals(q), q).phi_star
    record(6, empirical >= 0.98 and exact >= 1 - 1e-9,
           f"TS phi* = {empirical:.4f} from 2e5 samples, {exact:.12f} exact")


def test_ac7_dkw_coverage():
    t0 = time.perf_counter()
    n, kappa, eps = 5, 1.0, 0.05
    m = dkw_sample_size(n, kappa, eps)
    covered = 0
    for trial in range(100):
        rng = np.random.default_rng(7000 + trial)
        d = random_empirical(n, rng)
        err = np.abs(monte_carlo_topk(d, m, trial) - exact_topk(d)).max()
        covered += err <= eps
    elapsed = time.perf_counter() - t0
    frac = covered / 100
    record(7, frac >= 0.80 and elapsed < 60,
           f"{covered}/100 trials within eps={eps} at m={m}, {elapsed:.1f}s")


def test_ac8_robust_lp():
    n, eps, phi = 5, 0.02, 0.9
    bound = 1 / (1 + n * eps)
    w = make_weights("dcg", n)
    rng = np.random.default_rng(8)
    fair_ok = util_ok = 0
    worst_fair = worst_ratio = np.inf
    for _ in range(20):
        d = random_empirical(n, rng)
        q, e = exact_topk(d), d.expected()
        true_inst = build_lp(q, e, w, phi)
        best = lp_objective(true_inst, solve_lp(true_inst))
        P = solve_lp(build_lp(robustify(perturb_columns(q, eps, rng), eps), e, w, phi))
        fair = fairness_level(P, q).phi_star
        util = lp_objective(true_inst, P)
        fair_ok += fair >= phi * bound - 1e-6
        util_ok += util >= bound * best - 1e-6
        worst_fair = min(worst_fair, fair)
        worst_ratio = min(worst_ratio, util / best if best > 0 else np.inf)
    record(8, fair_ok == 20 and util_ok == 20,
           f"fairness {fair_ok}/20 (min {worst_fair:.4f} vs {phi * bound:.4f}), "
           f"utility {util_ok}/20 (min ratio {worst_ratio:.4f} vs {bound:.4f})")


@pytest.mark.slow
def test_ac9_movielens_synthetic():
    t0 = time.perf_counter()
    table = genre_experiment(synthetic_movielens())
    elapsed = time.perf_counter() - t0
    ndcg1 = table.lp_ndcg[-1]
    monotone = bool(np.all(np.diff(table.lp_ndcg) <= 1e-6))
    record(9, ndcg1 >= 0.97 and monotone and elapsed < 300,
           f"synthetic Comedy NDCG(phi=1) = {ndcg1:.4f}, monotone={monotone}, {elapsed:.1f}s")


ML100K = os.environ.get("FAIRRANK_ML100K")


@pytest.mark.slow
@pytest.mark.skipif(not ML100K or not (Path(ML100K) / "u.data").exists(),
                    reason="set FAIRRANK_ML100K to a directory holding u.data and u.item")
def test_ac9_movielens_real():
    t0 = time.perf_counter()
    dataset = load_movielens(Path(ML100K) / "u.data", Path(ML100K) / "u.item")
    table = genre_experiment(dataset)
    elapsed = time.perf_counter() - t0
    drop = 1 - table.lp_ndcg[-1]
    monotone = bool(np.all(np.diff(table.lp_ndcg) <= 1e-6))
    record(9, drop <= 0.03 and monotone and elapsed < 300,
           f"ML-100K Comedy NDCG drop at phi=1 = {drop:.4f}, monotone={monotone}, {elapsed:.1f}s")


def test_ac10_exposure():
    gini_wins = zero_wins = 0
    for trial in range(50):
        S = synthetic_scores(400, 100, seed=trial)
        res = relevance_experiment(S, users_per_arm=200, top_t=5, seed=trial)
        gini_wins += res.ts_gini < res.opt_gini
        zero_wins += res.ts_unexposed <= res.opt_unexposed
    record(10, gini_wins >= 45 and zero_wins >= 45,
           f"TS Gini lower in {gini_wins}/50 trials, TS unexposed <= OPT in {zero_wins}/50 trials")

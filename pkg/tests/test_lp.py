import numpy as np
import pytest

from fairrank.audit import fairness_level
from fairrank.errors import InvariantError
from fairrank.lp import build_lp, lp_objective, lp_policy, solve_lp
from fairrank.merit import DirichletMultinomialModel, EmpiricalMeritDistribution
from fairrank.policies import check_doubly_stochastic, opt_ranking, ts_marginals
from fairrank.topk import exact_topk, monte_carlo_topk, robustify
from fairrank.utility import make_weights, policy_utility

from helpers import perturb_columns, random_empirical

E2 = np.array([1.0, 0.5, 0.5])


def _feasible(P, inst, tol=1e-9):
    check_doubly_stochastic(P, atol=1e-9)
    return np.all(np.cumsum(P, axis=1) - inst.rhs >= -tol)


class TestBuild:
    def test_shapes(self, ex2_q, ex2_w):
        inst = build_lp(ex2_q, E2, ex2_w, 0.5)
        A_ub, b_ub, A_eq, b_eq = inst.constraints()
        assert A_ub.shape == (9, 9) and A_eq.shape == (6, 9)
        np.testing.assert_allclose(-b_ub, 0.5 * ex2_q.ravel())
        np.testing.assert_allclose(inst.objective, np.outer(E2, ex2_w))

    def test_cumulative_rows(self, ex2_q, ex2_w):
        A_ub = build_lp(ex2_q, E2, ex2_w, 1).constraints()[0].toarray()
        # constraint (agent 1, k=2) sums P[1, 0] and P[1, 1]
        expected = np.zeros(9)
        expected[[3, 4]] = -1
        np.testing.assert_array_equal(A_ub[4], expected)

    def test_phi_zero_vacuous(self, ex2_q, ex2_w):
        assert np.all(build_lp(ex2_q, E2, ex2_w, 0).rhs == 0)

    @pytest.mark.parametrize("phi", [-0.1, 1.01])
    def test_phi_range(self, ex2_q, ex2_w, phi):
        with pytest.raises(InvariantError):
            build_lp(ex2_q, E2, ex2_w, phi)

    def test_dimension_mismatch(self, ex2_q):
        with pytest.raises(InvariantError):
            build_lp(ex2_q, [1, 2], [1, 1, 0], 0.5)

    @pytest.mark.parametrize("method", ["highs", "simplex"])
    def test_single_agent(self, method):
        P = solve_lp(build_lp([[1.0]], [2.0], [1.0], 0.7), method=method)
        np.testing.assert_allclose(P, [[1.0]])


@pytest.mark.parametrize("method", ["highs", "simplex"])
class TestExample2:
    def test_phi_zero(self, ex2_q, ex2_w, method):
        inst = build_lp(ex2_q, E2, ex2_w, 0)
        assert lp_objective(inst, solve_lp(inst, method=method)) == pytest.approx(1.5, abs=1e-9)

    def test_phi_one_forced(self, ex2_q, ex2_w, method):
        inst = build_lp(ex2_q, E2, ex2_w, 1)
        P = solve_lp(inst, method=method)
        np.testing.assert_allclose(P, ts_marginals(ex2_q), atol=1e-8)
        assert lp_objective(inst, P) == pytest.approx(35 / 24, abs=1e-9)

    def test_six_sevenths(self, ex2_q, ex2_w, method):
        phi = 6 / 7
        inst = build_lp(ex2_q, E2, ex2_w, phi)
        P = solve_lp(inst, method=method)
        assert 1.5 - phi / 24 - 1e-9 <= lp_objective(inst, P) <= 1.5 + 1e-9
        assert _feasible(P, inst)


def test_phi_one_without_shortcut_matches(ex2_q, ex2_w):
    # nudging phi just below 1 exercises the solver on the nearly degenerate region
    inst = build_lp(ex2_q, E2, ex2_w, 1 - 1e-12)
    P = solve_lp(inst)
    np.testing.assert_allclose(P, ts_marginals(ex2_q), atol=1e-8)


@pytest.mark.parametrize("seed", range(12))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    d = random_empirical(n, rng)
    q, e = exact_topk(d), d.expected()
    w = make_weights(["dcg", "reciprocal", "precision:1"][seed % 3], n)
    phi = float(rng.uniform())
    a = build_lp(q, e, w, phi)
    Pa, Pb = solve_lp(a, "highs"), solve_lp(a, "simplex")
    assert lp_objective(a, Pa) == pytest.approx(lp_objective(a, Pb), abs=1e-7)
    assert _feasible(Pa, a) and _feasible(Pb, a)


@pytest.mark.parametrize("seed", range(8))
def test_feasible_and_monotone_over_grid(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(2, 7))
    d = random_empirical(n, rng)
    q, e, w = exact_topk(d), d.expected(), make_weights("dcg", n)
    values = []
    for phi in np.linspace(0, 1, 11):
        inst = build_lp(q, e, w, phi)
        P = solve_lp(inst)
        assert _feasible(P, inst)
        values.append(lp_objective(inst, P))
    assert np.all(np.diff(values) <= 1e-9)
    # phi = 0 recovers the sorting policy
    assert values[0] == pytest.approx(w @ np.sort(e)[::-1], abs=1e-9)


def test_incentive_example():
    """One known good majority candidate vs. n URM candidates, one of which is better."""
    n, eps = 4, 0.2
    support = []
    for j in range(n):
        v = np.zeros(n + 1)
        v[0] = 1.0
        v[1 + j] = 1 + eps
        support.append(v)
    d = EmpiricalMeritDistribution(support, np.full(n, 1 / n))
    q, e = exact_topk(d), d.expected()
    w = make_weights("precision:1", n + 1)
    u_opt = lp_objective(build_lp(q, e, w, 0), solve_lp(build_lp(q, e, w, 0)))
    inst = build_lp(q, e, w, 1)
    u_fair = lp_objective(inst, solve_lp(inst))
    assert u_opt == pytest.approx(1.0, abs=1e-9)
    assert u_fair == pytest.approx((1 + eps) / n, abs=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_robust_solution_guarantees(seed):
    rng = np.random.default_rng(500 + seed)
    n = int(rng.integers(2, 7))
    eps, phi = 0.03, float(rng.uniform(0.3, 0.95))
    d = random_empirical(n, rng)
    q, e, w = exact_topk(d), d.expected(), make_weights("dcg", n)
    best = lp_objective(build_lp(q, e, w, phi), solve_lp(build_lp(q, e, w, phi)))
    noisy = perturb_columns(q, eps, rng)
    inst = build_lp(robustify(noisy, eps), e, w, phi)
    P = solve_lp(inst)
    bound = 1 / (1 + n * eps)
    assert fairness_level(P, q).phi_star >= phi * bound - 1e-6
    assert policy_utility(P, e, w) >= bound * best - 1e-6


class TestLpPolicy:
    def test_phi_zero_point_mass(self):
        rng = np.random.default_rng(3)
        d = random_empirical(5, rng, tie_prob=0)
        lottery = lp_policy(exact_topk(d), d.expected(), make_weights("dcg", 5), 0)
        assert len(lottery) == 1
        assert lottery.rankings[0] == opt_ranking(d.expected())

    def test_example2_phi_one(self, ex2_q, ex2_w):
        lottery = lp_policy(ex2_q, E2, ex2_w, 1)
        np.testing.assert_allclose(lottery.marginals(), ts_marginals(ex2_q), atol=1e-8)

    def test_forty_items(self):
        rng = np.random.default_rng(7)
        counts = rng.multinomial(6, [0.06, 0.11, 0.27, 0.34, 0.22], size=40)
        model = DirichletMultinomialModel(np.array([0.06, 0.11, 0.27, 0.34, 0.22]) + counts)
        q = monte_carlo_topk(model, 50_000, 1)
        w = make_weights("dcg", 40)
        for phi in (0.5, 0.9):
            lottery = lp_policy(q, model.expected(), w, phi)
            assert fairness_level(lottery.marginals(), q).phi_star >= phi - 1e-6

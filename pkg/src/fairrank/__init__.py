"""Approximately fair rankings under uncertain merit."""

from .audit import FairnessReport, exposure_counts, fairness_level, gini, is_phi_fair
from .bvn import bvn_decompose
from .errors import DataError, FairRankError, InvariantError, SolverError
from .lp import FairLpInstance, build_lp, lp_policy, solve_lp
from .merit import (
    DirichletMultinomialModel,
    EmpiricalMeritDistribution,
    GaussianRelevanceModel,
    dirichlet_expected_merit,
    dirichlet_posterior_from_counts,
    expected_merits,
    gaussian_sigma_calibration,
    sample_merits,
)
from .policies import (
    RankingDistribution,
    marginals_of_distribution,
    mixing_sample,
    opt_ranking,
    ts_marginals,
    ts_sample,
)
from .topk import dkw_sample_size, exact_topk, monte_carlo_topk, robustify
from .utility import make_weights, ndcg, policy_utility, ranking_utility

__version__ = "0.1.0"

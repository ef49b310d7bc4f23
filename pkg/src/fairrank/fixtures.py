"""Built-in three-agent instance used for golden tests and the CLI.

Agent 0 has merit 1 for sure; agents 1 and 2 have independent
Bernoulli(1/2) merits.  Position weights are (1, 1, 0).
"""

import numpy as np

from .merit import EmpiricalMeritDistribution
from .policies import RankingDistribution

EXAMPLE2_TOPK = np.array([[14, 22, 24], [5, 13, 24], [5, 13, 24]]) / 24
EXAMPLE2_WEIGHTS = np.array([1.0, 1.0, 0.0])


def example2_distribution() -> EmpiricalMeritDistribution:
    coin = [(0.0, 0.5), (1.0, 0.5)]
    return EmpiricalMeritDistribution.independent([[(1.0, 1.0)], coin, coin])


def example2_opt_lottery() -> RankingDistribution:
    """Uniform lottery over the four rankings that keep agent 0 in the top two."""
    return RankingDistribution(
        [((0, 1, 2), 0.25), ((0, 2, 1), 0.25), ((1, 0, 2), 0.25), ((2, 0, 1), 0.25)]
    )

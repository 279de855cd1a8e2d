"""Relative-budget theory of RL with verifiable rewards under the gamma
time-to-solution model: closed-form reward statistics, optimal budgets,
idealized online-RL dynamics, Monte-Carlo oracles and a trace pipeline."""

from .errors import (DataError, DegenerateError, DomainError, NumericError,
                     RelBudgetError)
from .regimes import Regime, RegimeThresholds, classify, optimal_xi
from .rewardstats import (Convention, GammaModel, RewardStats, anti_concentration,
                          c_rl, c_sft, expected_return_J, psi, sigma_rl, sigma_sft)

__version__ = "0.1.0"

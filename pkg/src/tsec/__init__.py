"""Thompson sampling under experimental constraints.

A constrained multi-armed bandit engine for factorial arm spaces: a Bayesian
probit model with two-factor interactions drives which arms stay in play and
how runs are allocated, with standard Thompson-sampling baselines and a
portfolio backtest harness for benchmarking.
"""

from .arms import (
    Arm,
    DesignLayout,
    FactorSpace,
    enumerate_arms,
    make_arm,
    random_arm_subset,
    random_regular_fraction,
)
from .bandit import BernoulliEnv, BetaState, beta_update, prob_best, pull, ts_select
from .errors import CapacityError, IngestionError, SamplerError
from .probit import ChainSettings, Hyperparams, PosteriorChain, TrialLedger, run_chain, thin

__all__ = [
    "Arm",
    "BernoulliEnv",
    "BetaState",
    "CapacityError",
    "ChainSettings",
    "DesignLayout",
    "FactorSpace",
    "Hyperparams",
    "IngestionError",
    "PosteriorChain",
    "SamplerError",
    "TrialLedger",
    "beta_update",
    "enumerate_arms",
    "make_arm",
    "prob_best",
    "pull",
    "random_arm_subset",
    "random_regular_fraction",
    "run_chain",
    "thin",
    "ts_select",
]

__version__ = "0.1.0"

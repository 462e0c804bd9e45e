"""Beta-Bernoulli Thompson sampling baselines with three arm-set policies.

All three share the same within-period sampler; they differ only in how the
K-arm active set evolves:

  B1  one random regular fraction, fixed for the whole study
  B2  arms whose estimated probability of being best drops below a threshold
      are swapped for uniformly random inactive arms at each switch
  B3  the active set is rebuilt each switch as the top K arms by estimated
      probability of being best over the whole arm space
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arms import FactorSpace, random_arm_subset, random_regular_fraction
from .bandit import (
    AllocationRecord,
    BernoulliEnv,
    BetaState,
    beta_update,
    prob_best,
    pull,
    ts_select,
)
from .engine import validate_initial_active

VARIANTS = ("B1", "B2", "B3")


@dataclass(frozen=True)
class BenchmarkConfig:
    variant: str
    num_active: int
    runs_per_period: int
    periods_per_switch: int
    num_switches: int
    fraction_power: int | None = None
    initial_active: tuple[int, ...] | None = None
    discard_threshold: float = 0.05
    prob_best_rounds: int = 1000
    # When False, a discarded arm's Beta counts reset; by default an arm
    # re-added later resumes where it left off.
    retain_discarded_states: bool = True

    def validate(self, space: FactorSpace) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not 1 <= self.num_active <= space.num_arms:
            raise ValueError("active-set size outside [1, N]")
        if self.runs_per_period < 1:
            raise ValueError("runs_per_period must be >= 1")
        if self.periods_per_switch < 1 or self.num_switches < 1:
            raise ValueError("periods_per_switch and num_switches must be >= 1")
        if not 0.0 < self.discard_threshold < 1.0:
            raise ValueError("discard_threshold must lie in (0, 1)")
        if self.prob_best_rounds < 1:
            raise ValueError("prob_best_rounds must be >= 1")
        if self.initial_active is not None:
            validate_initial_active(self.initial_active, self.num_active, space)
        if self.fraction_power is not None:
            runs = 2 ** (space.num_factors - self.fraction_power)
            if runs != self.num_active:
                raise ValueError(
                    "fraction_power inconsistent with active-set size: "
                    f"2^(M-q)={runs} but K={self.num_active}"
                )


def _initial_set(space: FactorSpace, config: BenchmarkConfig, rng: np.random.Generator) -> list[int]:
    """Explicit set if given (consumes no randomness), else a regular
    fraction when one is configured and fits, else a random subset."""
    if config.initial_active is not None:
        return sorted(config.initial_active)
    if config.fraction_power is not None and all(l == 2 for l in space.levels):
        arms = random_regular_fraction(space, config.fraction_power, rng)
        return sorted(arm.index for arm in arms)
    return sorted(arm.index for arm in random_arm_subset(space, config.num_active, rng))


def _play_block(
    env: BernoulliEnv,
    states: BetaState,
    active: list[int],
    config: BenchmarkConfig,
    s: int,
    rng: np.random.Generator,
    records: list[AllocationRecord],
) -> None:
    """T periods of standard Thompson sampling over the active set."""
    for t in range(1, config.periods_per_switch + 1):
        record = AllocationRecord(s=s, t=t)
        for _ in range(config.runs_per_period):
            arm = ts_select(states, active, rng)
            y = pull(env, arm, rng)
            beta_update(states, arm, y)
            record.add(arm, y)
        records.append(record)


def run_benchmark1(
    space: FactorSpace,
    env: BernoulliEnv,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[AllocationRecord]:
    """Fixed active set for the whole study."""
    config.validate(space)
    active = _initial_set(space, config, rng)
    states = BetaState(space.num_arms)
    records: list[AllocationRecord] = []
    for s in range(1, config.num_switches + 1):
        _play_block(env, states, active, config, s, rng, records)
    return records


def refresh_by_prob_best(
    states: BetaState,
    active: list[int],
    space: FactorSpace,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[int]:
    """One B2 switch: drop improbable-best arms, refill from the inactive pool."""
    estimates = prob_best(states, active, config.prob_best_rounds, rng)
    keep = [a for a, p in zip(active, estimates) if p >= config.discard_threshold]
    dropped = [a for a in active if a not in keep]
    if not dropped:
        return active
    pool = np.setdiff1d(np.arange(space.num_arms), np.asarray(active))
    fresh = rng.choice(pool, size=len(dropped), replace=False)
    if not config.retain_discarded_states:
        for a in dropped:
            states.alpha[a] = 1.0
            states.beta[a] = 1.0
    return sorted(keep + [int(a) for a in fresh])


def select_by_prob_best(
    states: BetaState,
    space: FactorSpace,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[int]:
    """One B3 switch: top K arms over the whole space, exact ties randomized."""
    all_arms = list(range(space.num_arms))
    estimates = prob_best(states, all_arms, config.prob_best_rounds, rng)
    keys = rng.random(space.num_arms)
    order = np.lexsort((keys, estimates))
    return sorted(int(a) for a in order[-config.num_active:])


def run_benchmark2(
    space: FactorSpace,
    env: BernoulliEnv,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[AllocationRecord]:
    """Discard improbable-best arms at each switch, refill at random."""
    config.validate(space)
    active = _initial_set(space, config, rng)
    states = BetaState(space.num_arms)
    records: list[AllocationRecord] = []
    for s in range(1, config.num_switches + 1):
        active = refresh_by_prob_best(states, active, space, config, rng)
        _play_block(env, states, active, config, s, rng, records)
    return records


def run_benchmark3(
    space: FactorSpace,
    env: BernoulliEnv,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[AllocationRecord]:
    """Rebuild the active set each switch: top K by probability of best.

    Never-pulled arms enter the joint draw with their fresh Beta(1, 1)
    priors, so with no data the selection is an exchangeable random subset.
    """
    config.validate(space)
    states = BetaState(space.num_arms)
    records: list[AllocationRecord] = []
    for s in range(1, config.num_switches + 1):
        active = select_by_prob_best(states, space, config, rng)
        _play_block(env, states, active, config, s, rng, records)
    return records


RUNNERS = {
    "B1": run_benchmark1,
    "B2": run_benchmark2,
    "B3": run_benchmark3,
}


def run_benchmark(
    space: FactorSpace,
    env: BernoulliEnv,
    config: BenchmarkConfig,
    rng: np.random.Generator,
) -> list[AllocationRecord]:
    config.validate(space)
    return RUNNERS[config.variant](space, env, config, rng)

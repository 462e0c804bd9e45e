"""Bernoulli environment, Beta-Bernoulli Thompson sampling, regret accounting."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class BernoulliEnv:
    true_mu: np.ndarray  # length N, entries in [0, 1]
    mu_star: float = field(init=False)
    optimal_arms: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        mu = np.asarray(self.true_mu, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ValueError("true_mu must be a nonempty vector")
        if np.any((mu < 0) | (mu > 1)):
            raise ValueError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "true_mu", mu)
        object.__setattr__(self, "mu_star", float(mu.max()))
        object.__setattr__(self, "optimal_arms", tuple(np.flatnonzero(mu == mu.max()).tolist()))


def pull(env: BernoulliEnv, arm_index: int, rng: np.random.Generator) -> int:
    """One Bernoulli(mu_a) reward."""
    return int(rng.random() < env.true_mu[arm_index])


class BetaState:
    """Per-arm Beta(alpha, beta) posteriors, initialized at the uniform prior."""

    def __init__(self, num_arms: int):
        self.alpha = np.ones(num_arms)
        self.beta = np.ones(num_arms)

    def observations(self, arm_index: int) -> int:
        return int(self.alpha[arm_index] + self.beta[arm_index] - 2)


def ts_select(states: BetaState, candidates, rng: np.random.Generator) -> int:
    """Sample each candidate's Beta posterior, play the argmax (ties uniform)."""
    cand = np.asarray(candidates, dtype=np.int64)
    if cand.size == 0:
        raise ValueError("candidate set is empty")
    theta = rng.beta(states.alpha[cand], states.beta[cand])
    best = np.flatnonzero(theta == theta.max())
    pick = best[0] if best.size == 1 else rng.choice(best)
    return int(cand[pick])


def beta_update(states: BetaState, arm_index: int, y: int) -> BetaState:
    if y not in (0, 1):
        raise ValueError("reward must be 0 or 1")
    if y:
        states.alpha[arm_index] += 1
    else:
        states.beta[arm_index] += 1
    return states


@dataclass
class AllocationRecord:
    """Run counts and observed successes for one (switch, period) cell."""

    s: int
    t: int
    counts: dict[int, int] = field(default_factory=dict)
    successes: dict[int, int] = field(default_factory=dict)

    def add(self, arm_index: int, y: int) -> None:
        self.counts[arm_index] = self.counts.get(arm_index, 0) + 1
        self.successes[arm_index] = self.successes.get(arm_index, 0) + y

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def period_regret(env: BernoulliEnv, record: AllocationRecord) -> float:
    """sum_a n_a (mu* - mu_a) for one period."""
    return float(sum(n * (env.mu_star - env.true_mu[a]) for a, n in record.counts.items()))


def cumulative_regret(env: BernoulliEnv, records: list[AllocationRecord]) -> np.ndarray:
    """Running regret over records in (s, t) order."""
    per = np.array([period_regret(env, rec) for rec in records])
    return np.cumsum(per)


def expected_reward(env: BernoulliEnv, records: list[AllocationRecord]) -> float:
    return float(
        sum(n * env.true_mu[a] for rec in records for a, n in rec.counts.items())
    )


def prob_best(states: BetaState, candidates, rounds: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo posterior probability of each candidate being the best arm.

    Each round draws one Beta sample per candidate jointly; a round's maximum
    splits its count over ties, so the result sums to 1.
    """
    cand = np.asarray(candidates, dtype=np.int64)
    if cand.size == 0:
        raise ValueError("candidate set is empty")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    theta = rng.beta(states.alpha[cand], states.beta[cand], size=(rounds, cand.size))
    is_max = theta == theta.max(axis=1, keepdims=True)
    weights = is_max / is_max.sum(axis=1, keepdims=True)
    return weights.sum(axis=0) / rounds


def regret_rows(method: str, replicate: int, env: BernoulliEnv, records: list[AllocationRecord]):
    """Rows for the regret.csv schema (method, replicate, s, t, period, cumulative)."""
    cum = 0.0
    for rec in records:
        r = period_regret(env, rec)
        cum += r
        yield [method, replicate, rec.s, rec.t, repr(r), repr(cum)]


def write_regret_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "replicate", "s", "t", "period_regret", "cum_regret"])
        w.writerows(rows)

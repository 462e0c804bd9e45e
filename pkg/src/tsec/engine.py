"""Constrained Thompson sampling over a factorial arm space.

The engine keeps an active set of K arms out of N. Within a switch period it
refits the probit interaction model on all data so far, thins the chain to
one posterior draw per run, and gives each run to the active arm whose
reward probability is largest under that draw. At the end of each switch
period the active set is rebuilt from the arms with the largest empirical
upper posterior quantile, computed over the full arm space.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .arms import (
    DesignLayout,
    FactorSpace,
    enumerate_arms,
    random_arm_subset,
    random_regular_fraction,
)
from .bandit import AllocationRecord, BernoulliEnv, pull
from .probit import (
    ChainSettings,
    PosteriorChain,
    TrialLedger,
    posterior_mu_matrix,
    run_chain,
    thin,
)

INIT_DESIGNS = ("random_subset", "regular_fraction")


@dataclass(frozen=True)
class TsecConfig:
    """Engine settings: budget shape, quantile level, and chain controls."""

    num_active: int
    runs_per_period: int
    periods_per_switch: int
    num_switches: int
    alpha: float = 0.05
    init_design: str = "random_subset"
    initial_active: tuple[int, ...] | None = None
    chain: ChainSettings = field(default_factory=ChainSettings)

    def validate(self, space: FactorSpace) -> None:
        if not 1 <= self.num_active <= space.num_arms:
            raise ValueError(
                f"active-set size {self.num_active} outside [1, {space.num_arms}]"
            )
        if self.runs_per_period < self.num_active:
            raise ValueError("need at least one run per active arm in a period")
        if self.periods_per_switch < 1 or self.num_switches < 1:
            raise ValueError("periods_per_switch and num_switches must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.init_design not in INIT_DESIGNS:
            raise ValueError(f"init_design must be one of {INIT_DESIGNS}")
        if self.initial_active is not None:
            validate_initial_active(self.initial_active, self.num_active, space)
        elif self.init_design == "regular_fraction":
            q = space.num_factors - int(math.log2(self.num_active))
            if 2**(space.num_factors - q) != self.num_active:
                raise ValueError("regular_fraction needs a power-of-two active-set size")


def validate_initial_active(
    initial_active: tuple[int, ...], num_active: int, space: FactorSpace
) -> None:
    """Check an explicit starting arm set: size K, distinct, in range."""
    if len(initial_active) != num_active:
        raise ValueError(
            f"initial_active has {len(initial_active)} arms, expected {num_active}"
        )
    if len(set(initial_active)) != len(initial_active):
        raise ValueError("initial_active contains duplicate arm indices")
    for arm_index in initial_active:
        if not 0 <= arm_index < space.num_arms:
            raise ValueError(
                f"initial_active arm {arm_index} outside [0, {space.num_arms})"
            )


@dataclass
class SwitchHistory:
    """Active sets per switch period with the add/remove deltas."""

    active_sets: list[list[int]] = field(default_factory=list)
    added: list[list[int]] = field(default_factory=list)
    removed: list[list[int]] = field(default_factory=list)

    def record(self, active: list[int]) -> None:
        current = sorted(active)
        if not self.active_sets:
            self.active_sets.append(current)
            self.added.append(list(current))
            self.removed.append([])
            return
        previous = set(self.active_sets[-1])
        self.active_sets.append(current)
        self.added.append(sorted(set(current) - previous))
        self.removed.append(sorted(previous - set(current)))


@dataclass
class RunResult:
    records: list[AllocationRecord]
    history: SwitchHistory
    ledger: TrialLedger


def initialize(
    space: FactorSpace,
    config: TsecConfig,
    env: BernoulliEnv,
    rng: np.random.Generator,
) -> tuple[list[int], TrialLedger, AllocationRecord]:
    """Pick the first active set and spread the first period's runs evenly.

    Each active arm gets floor(n/K) pulls; the remainder goes to a uniformly
    chosen subset of arms, one extra pull each. An explicit initial_active
    set bypasses the design draw (used to pair methods on one shared design);
    it consumes no random numbers.
    """
    config.validate(space)
    if config.initial_active is not None:
        active = sorted(config.initial_active)
    elif config.init_design == "regular_fraction":
        q = space.num_factors - int(math.log2(config.num_active))
        arms = random_regular_fraction(space, q, rng)
        active = sorted(arm.index for arm in arms)
    else:
        active = sorted(arm.index for arm in random_arm_subset(space, config.num_active, rng))

    k = config.num_active
    n = config.runs_per_period
    counts = np.full(k, n // k, dtype=np.int64)
    remainder = n - int(counts.sum())
    if remainder:
        extra = rng.choice(k, size=remainder, replace=False)
        counts[extra] += 1

    ledger = TrialLedger()
    record = AllocationRecord(s=1, t=1)
    for slot, arm_index in enumerate(active):
        for _ in range(int(counts[slot])):
            y = pull(env, arm_index, rng)
            ledger.append(arm_index, 1, 1, y)
            record.add(arm_index, y)
    return active, ledger, record


def allocate_period(
    draws: np.ndarray,
    active: list[int],
    space: FactorSpace,
    layout: DesignLayout,
    env: BernoulliEnv,
    ledger: TrialLedger,
    s: int,
    t: int,
    rng: np.random.Generator,
) -> AllocationRecord:
    """Give each of the n posterior draws one run on its argmax active arm."""
    if not active:
        raise ValueError("active set is empty")
    arms = [space.arm_at(i) for i in active]
    # mu is monotone in the linear predictor, so argmax over rows @ draw
    # equals argmax over probabilities; skip the CDF evaluation.
    rows = layout.encode_all(arms)
    scores = rows @ draws.T  # (K, n_draws)
    record = AllocationRecord(s=s, t=t)
    n_draws = scores.shape[1]
    for j in range(n_draws):
        column = scores[:, j]
        best = np.flatnonzero(column == column.max())
        slot = int(best[0]) if best.size == 1 else int(rng.choice(best))
        arm_index = active[slot]
        y = pull(env, arm_index, rng)
        ledger.append(arm_index, s, t, y)
        record.add(arm_index, y)
    return record


def top_k_by_quantile(
    mu_matrix: np.ndarray,
    k: int,
    alpha: float,
    rng: np.random.Generator,
) -> list[int]:
    """Rows with the largest empirical (1-alpha) quantile, ties uniform.

    The quantile is the 1-based order statistic at ceil((1-alpha) * draws).
    Returns row indices sorted ascending.
    """
    num_arms, num_draws = mu_matrix.shape
    if not 1 <= k <= num_arms:
        raise ValueError(f"k={k} outside [1, {num_arms}]")
    position = math.ceil((1.0 - alpha) * num_draws)
    position = min(max(position, 1), num_draws)
    ordered = np.sort(mu_matrix, axis=1)
    quantiles = ordered[:, position - 1]
    # Random keys only break exact ties: sort by (quantile, key).
    keys = rng.random(num_arms)
    order = np.lexsort((keys, quantiles))
    return sorted(int(i) for i in order[-k:])


def select_arm_set(
    chain: PosteriorChain,
    space: FactorSpace,
    layout: DesignLayout,
    k: int,
    alpha: float,
    rng: np.random.Generator,
) -> list[int]:
    """Rebuild the active set from the whole arm space by upper quantile."""
    arms = enumerate_arms(space)
    mu = posterior_mu_matrix(chain.betas, arms, layout)
    return top_k_by_quantile(mu, k, alpha, rng)


def run(
    space: FactorSpace,
    env: BernoulliEnv,
    config: TsecConfig,
    rng: np.random.Generator,
) -> RunResult:
    """Execute the full budgeted study: S switch periods of T periods each.

    The equal-allocation initialization is the first period (s=1, t=1), so
    the total number of pulls is exactly S*T*n. Every later period refits
    the chain on the entire ledger and thins it to one draw per run. The
    active set is rebuilt after the last period of each switch except the
    final one; each refit warm-starts at the previous chain's posterior mean.
    """
    config.validate(space)
    layout = DesignLayout(space)
    history = SwitchHistory()

    active, ledger, first_record = initialize(space, config, env, rng)
    history.record(active)
    records = [first_record]

    chain = None
    for s in range(1, config.num_switches + 1):
        for t in range(1, config.periods_per_switch + 1):
            if s == 1 and t == 1:
                continue  # initialization already allocated this period
            chain = run_chain(
                ledger, space, layout, config.chain, rng,
                init=None if chain is None else chain.posterior_mean(),
            )
            draws = thin(chain, config.runs_per_period, rng)
            records.append(
                allocate_period(
                    draws, active, space, layout, env, ledger, s, t, rng,
                )
            )
        if s < config.num_switches:
            chain = run_chain(
                ledger, space, layout, config.chain, rng,
                init=None if chain is None else chain.posterior_mean(),
            )
            active = select_arm_set(
                chain, space, layout, config.num_active, config.alpha, rng,
            )
            history.record(active)

    return RunResult(records=records, history=history, ledger=ledger)


def armset_rows(replicate: int, history: SwitchHistory):
    """Yield armsets.csv rows: one per arm per switch with its action."""
    for s, active in enumerate(history.active_sets, start=1):
        added = set(history.added[s - 1])
        for arm_index in active:
            action = "added" if arm_index in added else "kept"
            yield [replicate, s, arm_index, action]
        for arm_index in history.removed[s - 1]:
            yield [replicate, s, arm_index, "removed"]


def write_armsets_csv(path, entries) -> None:
    """entries: iterable of (replicate, SwitchHistory) pairs."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["replicate", "s", "arm_index", "action"])
        for replicate, history in entries:
            writer.writerows(armset_rows(replicate, history))

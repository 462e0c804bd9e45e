"""Spike-and-slab ground truth for simulated factorial studies.

Effects are drawn tier by tier with heredity: a two-factor interaction's
activity probability depends on whether its parent main effects are active,
and a three-factor interaction's on how many of its three parents are. Every
effect draws a value either way; inactive effects come from a narrow spike
rather than being exactly zero. True reward probabilities include the
three-factor terms, so a two-factor fitted model is deliberately
misspecified against this truth.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .arms import Arm, FactorSpace, enumerate_arms
from .bandit import BernoulliEnv


@dataclass(frozen=True)
class TierSpec:
    """Spike/slab widths for one effect tier."""

    sigma_spike: float
    sigma_slab: float

    def __post_init__(self) -> None:
        if self.sigma_spike <= 0 or self.sigma_slab <= 0:
            raise ValueError("spike and slab widths must be positive")

    def sigma(self, active: bool) -> float:
        return self.sigma_slab if active else self.sigma_spike


# Activity probability for a 2FI keyed by the number of active parents (0..2),
# and for a 3FI keyed by the number of active parents (0..3).
ME_P_ACTIVE = 0.41
TFI_P_ACTIVE = {2: 0.33, 1: 0.045, 0: 0.0048}
THFI_P_ACTIVE = {3: 0.15, 2: 0.067, 1: 0.035, 0: 0.012}


@dataclass(frozen=True)
class SpikeSlabSpec:
    """Hierarchical spike-and-slab generator settings."""

    me: TierSpec = TierSpec(1.0, 10.0)
    tfi: TierSpec = TierSpec(0.278, 2.78)
    thfi: TierSpec = TierSpec(0.137, 1.37)
    me_p_active: float = ME_P_ACTIVE
    tfi_p_active: dict[int, float] = field(default_factory=lambda: dict(TFI_P_ACTIVE))
    thfi_p_active: dict[int, float] = field(default_factory=lambda: dict(THFI_P_ACTIVE))
    intercept: float = 0.0
    # Global multiplier on every drawn effect value (not the intercept).
    # Default 1 reproduces the generator verbatim; smaller values keep
    # desk-scale studies away from saturated reward probabilities.
    effect_scale: float = 1.0

    def __post_init__(self) -> None:
        probs = [self.me_p_active, *self.tfi_p_active.values(), *self.thfi_p_active.values()]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("activity probabilities must lie in [0, 1]")
        if sorted(self.tfi_p_active) != [0, 1, 2]:
            raise ValueError("tfi_p_active must be keyed by active-parent count 0..2")
        if sorted(self.thfi_p_active) != [0, 1, 2, 3]:
            raise ValueError("thfi_p_active must be keyed by active-parent count 0..3")
        if self.effect_scale <= 0:
            raise ValueError("effect_scale must be positive")


@dataclass(frozen=True)
class TruthEffects:
    """One drawn truth: activity flags and values under baseline coding.

    Main effects are keyed by (factor, level) for levels 2..L; interactions
    by (factors tuple, levels tuple) with every level above baseline.
    Activity flags are stored per effect group (one flag per factor, pair,
    or triple); ``provenance`` records the active-parent count each
    interaction group saw when its activity was drawn.
    """

    space: FactorSpace
    intercept: float
    me_active: dict[int, bool]
    me_values: dict[tuple[int, int], float]
    tfi_active: dict[tuple[int, int], bool]
    tfi_values: dict[tuple[tuple[int, int], tuple[int, int]], float]
    thfi_active: dict[tuple[int, int, int], bool]
    thfi_values: dict[tuple[tuple[int, int, int], tuple[int, int, int]], float]
    provenance: dict[tuple[int, ...], int]


def sample_truth(space: FactorSpace, spec: SpikeSlabSpec, rng: np.random.Generator) -> TruthEffects:
    """Draw a complete set of effects for the given factor space."""
    m_count = space.num_factors
    scale = spec.effect_scale

    me_active: dict[int, bool] = {}
    me_values: dict[tuple[int, int], float] = {}
    for m in range(1, m_count + 1):
        active = bool(rng.random() < spec.me_p_active)
        me_active[m] = active
        sigma = spec.me.sigma(active)
        for level in range(2, space.levels[m - 1] + 1):
            me_values[(m, level)] = scale * sigma * rng.standard_normal()

    tfi_active: dict[tuple[int, int], bool] = {}
    tfi_values: dict[tuple[tuple[int, int], tuple[int, int]], float] = {}
    provenance: dict[tuple[int, ...], int] = {}
    for m1, m2 in itertools.combinations(range(1, m_count + 1), 2):
        n_parents = int(me_active[m1]) + int(me_active[m2])
        provenance[(m1, m2)] = n_parents
        active = bool(rng.random() < spec.tfi_p_active[n_parents])
        tfi_active[(m1, m2)] = active
        sigma = spec.tfi.sigma(active)
        for l1 in range(2, space.levels[m1 - 1] + 1):
            for l2 in range(2, space.levels[m2 - 1] + 1):
                tfi_values[((m1, m2), (l1, l2))] = scale * sigma * rng.standard_normal()

    thfi_active: dict[tuple[int, int, int], bool] = {}
    thfi_values: dict[tuple[tuple[int, int, int], tuple[int, int, int]], float] = {}
    for m1, m2, m3 in itertools.combinations(range(1, m_count + 1), 3):
        n_parents = int(me_active[m1]) + int(me_active[m2]) + int(me_active[m3])
        provenance[(m1, m2, m3)] = n_parents
        active = bool(rng.random() < spec.thfi_p_active[n_parents])
        thfi_active[(m1, m2, m3)] = active
        sigma = spec.thfi.sigma(active)
        for l1 in range(2, space.levels[m1 - 1] + 1):
            for l2 in range(2, space.levels[m2 - 1] + 1):
                for l3 in range(2, space.levels[m3 - 1] + 1):
                    thfi_values[((m1, m2, m3), (l1, l2, l3))] = scale * sigma * rng.standard_normal()

    return TruthEffects(
        space=space,
        intercept=spec.intercept,
        me_active=me_active,
        me_values=me_values,
        tfi_active=tfi_active,
        tfi_values=tfi_values,
        thfi_active=thfi_active,
        thfi_values=thfi_values,
        provenance=provenance,
    )


def linear_predictor(truth: TruthEffects, arm: Arm) -> float:
    """Sum of intercept and all effects whose levels the arm matches."""
    levels = arm.levels
    total = truth.intercept
    for m, level in enumerate(levels, start=1):
        if level > 1:
            total += truth.me_values[(m, level)]
    m_count = len(levels)
    for m1, m2 in itertools.combinations(range(1, m_count + 1), 2):
        l1, l2 = levels[m1 - 1], levels[m2 - 1]
        if l1 > 1 and l2 > 1:
            total += truth.tfi_values[((m1, m2), (l1, l2))]
    for m1, m2, m3 in itertools.combinations(range(1, m_count + 1), 3):
        l1, l2, l3 = levels[m1 - 1], levels[m2 - 1], levels[m3 - 1]
        if l1 > 1 and l2 > 1 and l3 > 1:
            total += truth.thfi_values[((m1, m2, m3), (l1, l2, l3))]
    return total


def true_mu(truth: TruthEffects, arm: Arm) -> float:
    return float(ndtr(linear_predictor(truth, arm)))


def build_env(truth: TruthEffects, space: FactorSpace) -> BernoulliEnv:
    """Tabulate the exact reward probability of every arm."""
    mu = np.array([true_mu(truth, arm) for arm in enumerate_arms(space)])
    return BernoulliEnv(true_mu=mu)


def truth_to_csv(truth: TruthEffects, path) -> None:
    """Dump every effect (including spike draws) for reproducibility."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["effect_kind", "factors", "levels", "active", "value"])
        writer.writerow(["intercept", "", "", 1, repr(truth.intercept)])
        for (m, level), value in sorted(truth.me_values.items()):
            writer.writerow(["me", str(m), str(level), int(truth.me_active[m]), repr(value)])
        for (factors, levels), value in sorted(truth.tfi_values.items()):
            writer.writerow([
                "tfi",
                ":".join(map(str, factors)),
                ":".join(map(str, levels)),
                int(truth.tfi_active[factors]),
                repr(value),
            ])
        for (factors, levels), value in sorted(truth.thfi_values.items()):
            writer.writerow([
                "thfi",
                ":".join(map(str, factors)),
                ":".join(map(str, levels)),
                int(truth.thfi_active[factors]),
                repr(value),
            ])

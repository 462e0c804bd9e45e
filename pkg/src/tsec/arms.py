"""Factorial arm spaces, feature encoding, and initial designs.

An arm is one level combination across M factors. Arms map to feature rows
of a two-way interaction model under baseline constraints: level 1 of every
factor is the reference, so only levels >= 2 get columns, for main effects
and for two-factor interaction cells alike.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError

MAX_ARMS = 1 << 20


@dataclass(frozen=True)
class FactorSpace:
    """An M-factor space; factor m has levels 1..L_m."""

    levels: tuple[int, ...]

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("need at least one factor")
        if any(l < 2 for l in self.levels):
            raise ValueError(f"every factor needs >= 2 levels, got {self.levels}")
        n = 1
        for l in self.levels:
            n *= l
            if n > MAX_ARMS:
                raise CapacityError(f"arm space exceeds {MAX_ARMS} arms")

    @property
    def num_factors(self) -> int:
        return len(self.levels)

    @property
    def num_arms(self) -> int:
        n = 1
        for l in self.levels:
            n *= l
        return n

    def index_of(self, levels: tuple[int, ...]) -> int:
        """Mixed-radix index, factor 1 most significant."""
        if len(levels) != self.num_factors:
            raise ValueError("level vector length mismatch")
        idx = 0
        for x, l in zip(levels, self.levels):
            if not 1 <= x <= l:
                raise ValueError(f"level {x} out of range 1..{l}")
            idx = idx * l + (x - 1)
        return idx

    def arm_at(self, index: int) -> "Arm":
        if not 0 <= index < self.num_arms:
            raise ValueError(f"arm index {index} out of range")
        digits = []
        rem = index
        for l in reversed(self.levels):
            digits.append(rem % l + 1)
            rem //= l
        return Arm(levels=tuple(reversed(digits)), index=index)


@dataclass(frozen=True)
class Arm:
    levels: tuple[int, ...]
    index: int


def enumerate_arms(space: FactorSpace) -> list[Arm]:
    """All N arms in mixed-radix index order."""
    return [space.arm_at(i) for i in range(space.num_arms)]


def make_arm(space: FactorSpace, levels: tuple[int, ...]) -> Arm:
    return Arm(levels=tuple(levels), index=space.index_of(tuple(levels)))


# Column tier codes used for the effect-hierarchy prior.
TIER_INTERCEPT = 0
TIER_ME = 1
TIER_TFI = 2


@dataclass(frozen=True)
class DesignLayout:
    """Column map of the two-way model under baseline constraints.

    Column 0 is the intercept. Main-effect columns follow factor by factor
    (levels 2..L_m), then interaction columns pair by pair (m < m'), each
    pair's cells in (level_m, level_m') lexicographic order. Constrained
    level-1 effects get no column.
    """

    space: FactorSpace
    me_offset: tuple[int, ...] = field(init=False)
    pair_offset: dict = field(init=False)
    dimension: int = field(init=False)

    def __post_init__(self):
        levels = self.space.levels
        m_count = len(levels)
        offs = []
        col = 1
        for m in range(m_count):
            offs.append(col)
            col += levels[m] - 1
        pair_offs = {}
        for m in range(m_count):
            for m2 in range(m + 1, m_count):
                pair_offs[(m, m2)] = col
                col += (levels[m] - 1) * (levels[m2] - 1)
        object.__setattr__(self, "me_offset", tuple(offs))
        object.__setattr__(self, "pair_offset", pair_offs)
        object.__setattr__(self, "dimension", col)

    def me_column(self, m: int, level: int) -> int:
        """Column of the main effect (factor m, level >= 2); 0-based m."""
        if level < 2:
            raise ValueError("level-1 effects are constrained to zero")
        return self.me_offset[m] + level - 2

    def tfi_column(self, m: int, m2: int, level: int, level2: int) -> int:
        if m >= m2:
            raise ValueError("pair must satisfy m < m'")
        if level < 2 or level2 < 2:
            raise ValueError("level-1 effects are constrained to zero")
        width2 = self.space.levels[m2] - 1
        return self.pair_offset[(m, m2)] + (level - 2) * width2 + (level2 - 2)

    def tiers(self) -> np.ndarray:
        """Per-column tier codes: 0 intercept, 1 ME, 2 2FI."""
        t = np.full(self.dimension, TIER_TFI, dtype=np.int64)
        t[0] = TIER_INTERCEPT
        for m in range(self.space.num_factors):
            lo = self.me_offset[m]
            t[lo : lo + self.space.levels[m] - 1] = TIER_ME
        return t

    def encode(self, arm: Arm) -> np.ndarray:
        """0/1 feature row of length p for one arm."""
        levels = self.space.levels
        if len(arm.levels) != len(levels):
            raise ValueError("arm does not belong to this space")
        row = np.zeros(self.dimension)
        row[0] = 1.0
        for m, x in enumerate(arm.levels):
            if not 1 <= x <= levels[m]:
                raise ValueError(f"level {x} out of range for factor {m + 1}")
            if x >= 2:
                row[self.me_column(m, x)] = 1.0
        for m in range(len(levels)):
            if arm.levels[m] < 2:
                continue
            for m2 in range(m + 1, len(levels)):
                if arm.levels[m2] >= 2:
                    row[self.tfi_column(m, m2, arm.levels[m], arm.levels[m2])] = 1.0
        return row

    def encode_all(self, arms: list[Arm]) -> np.ndarray:
        """(len(arms), p) matrix of feature rows."""
        out = np.zeros((len(arms), self.dimension))
        for i, a in enumerate(arms):
            out[i] = self.encode(a)
        return out


def layout_dimension(space: FactorSpace) -> int:
    """p = 1 + sum(L_m - 1) + sum_{m<m'} (L_m - 1)(L_m' - 1)."""
    levels = space.levels
    p = 1 + sum(l - 1 for l in levels)
    for m in range(len(levels)):
        for m2 in range(m + 1, len(levels)):
            p += (levels[m] - 1) * (levels[m2] - 1)
    return p


def encode_arm(space: FactorSpace, layout: DesignLayout, arm: Arm) -> np.ndarray:
    if layout.space != space:
        raise ValueError("layout built for a different space")
    return layout.encode(arm)


def random_regular_fraction(space: FactorSpace, q: int, rng: np.random.Generator) -> list[Arm]:
    """A random regular 2^(M-q) fraction of an all-2-level space.

    M-q basic factors are drawn uniformly; each remaining factor is aliased
    to the product of a random subset (size >= 2) of basic columns, with
    generator words resampled until all M words are distinct.
    """
    levels = space.levels
    if any(l != 2 for l in levels):
        raise ValueError("regular fractions require an all-2-level space")
    m_count = space.num_factors
    if not 1 <= q < m_count:
        raise ValueError(f"fraction power q={q} must satisfy 1 <= q < M={m_count}")
    n_basic = m_count - q
    # Distinct words of size >= 2 over the basic columns must cover q factors.
    if (1 << n_basic) - n_basic - 1 < q:
        raise ValueError(f"cannot build {q} distinct generators from {n_basic} basic factors")

    factors = list(rng.permutation(m_count))
    basic, generated = factors[:n_basic], factors[n_basic:]

    words: set[frozenset[int]] = set()
    gen_words = []
    for _ in generated:
        while True:
            size = int(rng.integers(2, n_basic + 1))
            word = frozenset(int(i) for i in rng.choice(n_basic, size=size, replace=False))
            if word not in words:
                words.add(word)
                gen_words.append(word)
                break

    runs = np.ones((1 << n_basic, m_count), dtype=np.int64)
    # Full factorial on the basic factors in +/- coding.
    for j, f in enumerate(basic):
        block = 1 << (n_basic - 1 - j)
        col = np.tile(np.repeat([-1, 1], block), (1 << n_basic) // (2 * block))
        runs[:, f] = col
    for f, word in zip(generated, gen_words):
        col = np.ones(1 << n_basic, dtype=np.int64)
        for j in word:
            col *= runs[:, basic[j]]
        runs[:, f] = col

    lv = (runs + 3) // 2  # -1 -> 1, +1 -> 2
    return [make_arm(space, tuple(int(x) for x in row)) for row in lv]


def random_arm_subset(space: FactorSpace, k: int, rng: np.random.Generator) -> list[Arm]:
    """K distinct arms, uniform over K-subsets."""
    n = space.num_arms
    if not 1 <= k <= n:
        raise ValueError(f"subset size {k} out of range 1..{n}")
    picks = rng.choice(n, size=k, replace=False)
    return [space.arm_at(int(i)) for i in picks]


def arms_to_csv(path, arms: list[Arm]) -> None:
    """Columns: arm_index, x_1, ..., x_M."""
    if not arms:
        raise ValueError("no arms to write")
    m_count = len(arms[0].levels)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arm_index"] + [f"x_{m + 1}" for m in range(m_count)])
        for a in arms:
            w.writerow([a.index] + list(a.levels))

import csv

import numpy as np
import pytest

from tsec.arms import (
    DesignLayout,
    FactorSpace,
    arms_to_csv,
    encode_arm,
    enumerate_arms,
    layout_dimension,
    make_arm,
    random_arm_subset,
    random_regular_fraction,
)
from tsec.errors import CapacityError


class TestFactorSpace:
    def test_rejects_empty_and_degenerate_levels(self):
        with pytest.raises(ValueError):
            FactorSpace(())
        with pytest.raises(ValueError):
            FactorSpace((2, 1))

    def test_capacity_limit(self):
        with pytest.raises(CapacityError):
            FactorSpace((2,) * 21)

    def test_arm_counts(self):
        assert FactorSpace((2, 2)).num_arms == 4
        assert FactorSpace((4,) * 5).num_arms == 1024
        assert FactorSpace((2,) * 10).num_arms == 1024

    def test_index_roundtrip_every_arm(self):
        space = FactorSpace((2, 3, 4))
        for i in range(space.num_arms):
            arm = space.arm_at(i)
            assert space.index_of(arm.levels) == i

    def test_mixed_radix_order(self):
        # factor 1 most significant: (1,1) -> 0, (1,2) -> 1, (2,1) -> 2
        space = FactorSpace((2, 2))
        assert space.index_of((1, 1)) == 0
        assert space.index_of((1, 2)) == 1
        assert space.index_of((2, 1)) == 2
        assert space.index_of((2, 2)) == 3

    def test_level_out_of_range(self):
        space = FactorSpace((2, 2))
        with pytest.raises(ValueError):
            space.index_of((3, 1))
        with pytest.raises(ValueError):
            space.index_of((1,))
        with pytest.raises(ValueError):
            space.arm_at(4)


class TestEnumerateArms:
    def test_small_space(self):
        arms = enumerate_arms(FactorSpace((2, 2)))
        assert [a.levels for a in arms] == [(1, 1), (1, 2), (2, 1), (2, 2)]
        assert [a.index for a in arms] == [0, 1, 2, 3]

    def test_distinctness_at_scale(self):
        arms = enumerate_arms(FactorSpace((4,) * 5))
        assert len(arms) == 1024
        assert len({a.levels for a in arms}) == 1024


class TestLayout:
    def test_dimension_closed_form(self):
        assert layout_dimension(FactorSpace((2,))) == 2
        assert layout_dimension(FactorSpace((2,) * 10)) == 56
        assert layout_dimension(FactorSpace((4,) * 5)) == 106

    def test_dimension_matches_randomized_configs(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            m = int(rng.integers(1, 6))
            levels = tuple(int(l) for l in rng.integers(2, 5, size=m))
            space = FactorSpace(levels)
            expected = (
                1
                + sum(l - 1 for l in levels)
                + sum(
                    (levels[i] - 1) * (levels[j] - 1)
                    for i in range(m)
                    for j in range(i + 1, m)
                )
            )
            assert layout_dimension(space) == expected
            assert DesignLayout(space).dimension == expected

    def test_baseline_arm_is_intercept_only(self):
        space = FactorSpace((3, 2, 4))
        layout = DesignLayout(space)
        row = layout.encode(make_arm(space, (1, 1, 1)))
        assert row[0] == 1.0
        assert row.sum() == 1.0

    def test_two_by_two_full_row(self):
        space = FactorSpace((2, 2))
        layout = DesignLayout(space)
        assert layout.dimension == 4
        row = layout.encode(make_arm(space, (2, 2)))
        expected_cols = {0, layout.me_column(0, 2), layout.me_column(1, 2),
                         layout.tfi_column(0, 1, 2, 2)}
        assert set(np.flatnonzero(row)) == expected_cols

    def test_row_sum_counting(self):
        # all factors at level 2 in a 3-factor binary space: 1 + 3 + 3 ones
        space = FactorSpace((2, 2, 2))
        layout = DesignLayout(space)
        row = layout.encode(make_arm(space, (2, 2, 2)))
        assert row.sum() == 7.0

    def test_row_block_structure(self):
        space = FactorSpace((3, 4, 2))
        layout = DesignLayout(space)
        tiers = layout.tiers()
        for arm in enumerate_arms(space):
            row = layout.encode(arm)
            assert row[0] == 1.0
            # at most one 1 per factor's ME block
            for m in range(space.num_factors):
                lo = layout.me_offset[m]
                block = row[lo : lo + space.levels[m] - 1]
                assert block.sum() <= 1.0
            # at most one 1 per pair block
            for (m, m2), lo in layout.pair_offset.items():
                width = (space.levels[m] - 1) * (space.levels[m2] - 1)
                assert row[lo : lo + width].sum() <= 1.0
        assert tiers[0] == 0
        assert set(tiers[1:].tolist()) == {1, 2}

    def test_encode_arm_wrapper_checks_space(self):
        space = FactorSpace((2, 2))
        other = FactorSpace((2, 3))
        layout = DesignLayout(space)
        with pytest.raises(ValueError):
            encode_arm(other, layout, make_arm(other, (1, 2)))

    def test_encode_rejects_foreign_arm(self):
        space = FactorSpace((2, 2))
        layout = DesignLayout(space)
        from tsec.arms import Arm

        with pytest.raises(ValueError):
            layout.encode(Arm(levels=(1, 1, 1), index=0))
        with pytest.raises(ValueError):
            layout.encode(Arm(levels=(1, 5), index=0))


class TestRegularFraction:
    def test_sixteen_run_fraction(self):
        space = FactorSpace((2,) * 10)
        rng = np.random.default_rng(42)
        arms = random_regular_fraction(space, 6, rng)
        assert len(arms) == 16
        assert len({a.index for a in arms}) == 16
        level_matrix = np.array([a.levels for a in arms])
        # each factor balanced: 8 runs at each level
        for m in range(10):
            assert np.sum(level_matrix[:, m] == 1) == 8
            assert np.sum(level_matrix[:, m] == 2) == 8

    def test_group_closure(self):
        # the +/- coded runs of a regular fraction are closed under
        # coordinate-wise product (they form a subgroup of {+1,-1}^M)
        space = FactorSpace((2,) * 10)
        rng = np.random.default_rng(3)
        arms = random_regular_fraction(space, 6, rng)
        signs = {tuple(2 * np.array(a.levels) - 3) for a in arms}
        as_list = list(signs)
        for u in as_list:
            for v in as_list:
                prod = tuple(int(x * y) for x, y in zip(u, v))
                assert prod in signs

    def test_three_factor_half_fraction(self):
        space = FactorSpace((2, 2, 2))
        for seed in range(20):
            arms = random_regular_fraction(space, 1, np.random.default_rng(seed))
            assert len(arms) == 4
            level_matrix = np.array([a.levels for a in arms])
            for m in range(3):
                assert np.sum(level_matrix[:, m] == 1) == 2
            # with M=3, q=1 the only admissible word is the product of both
            # basic factors, so the design is a resolution-III half fraction
            signs = 2 * level_matrix - 3
            triple = signs[:, 0] * signs[:, 1] * signs[:, 2]
            assert len(set(triple.tolist())) == 1

    def test_q_out_of_range(self):
        space = FactorSpace((2, 2, 2))
        for q in (0, 3, 5):
            with pytest.raises(ValueError):
                random_regular_fraction(space, q, np.random.default_rng(0))

    def test_infeasible_word_count(self):
        # M=4, q=2 leaves 2 basic factors: only one word of size >= 2 exists
        space = FactorSpace((2,) * 4)
        with pytest.raises(ValueError):
            random_regular_fraction(space, 2, np.random.default_rng(0))

    def test_requires_binary_space(self):
        with pytest.raises(ValueError):
            random_regular_fraction(FactorSpace((2, 3)), 1, np.random.default_rng(0))


class TestRandomSubset:
    def test_full_subset_is_all_arms(self):
        space = FactorSpace((2, 2))
        arms = random_arm_subset(space, 4, np.random.default_rng(0))
        assert sorted(a.index for a in arms) == [0, 1, 2, 3]

    def test_single_arm(self):
        space = FactorSpace((2, 3))
        (arm,) = random_arm_subset(space, 1, np.random.default_rng(5))
        assert 0 <= arm.index < 6

    def test_same_seed_same_subset(self):
        space = FactorSpace((2,) * 8)
        a = random_arm_subset(space, 10, np.random.default_rng(11))
        b = random_arm_subset(space, 10, np.random.default_rng(11))
        assert [x.index for x in a] == [x.index for x in b]

    def test_out_of_range(self):
        space = FactorSpace((2, 2))
        with pytest.raises(ValueError):
            random_arm_subset(space, 5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            random_arm_subset(space, 0, np.random.default_rng(0))


class TestCsv:
    def test_roundtrip(self, tmp_path):
        space = FactorSpace((2, 3))
        arms = enumerate_arms(space)
        path = tmp_path / "arms.csv"
        arms_to_csv(path, arms)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["arm_index", "x_1", "x_2"]
        assert len(rows) == 7
        assert rows[1] == ["0", "1", "1"]
        assert rows[-1] == ["5", "2", "3"]

    def test_empty_list_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            arms_to_csv(tmp_path / "arms.csv", [])

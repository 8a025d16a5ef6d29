import math

import numpy as np
import pytest

from moimpute.datasets import normalize, split
from moimpute.missing import (
    CANONICAL_RATIOS,
    InfeasibleMaskError,
    MissingSpec,
    MissingType,
    Pattern,
    Situation,
    apply_situation,
    generate_missing,
    grid_specs,
    mask_to_pairs,
)


def spec(ratio, pattern=Pattern.SIMPLE, mtype=MissingType.OVERALL,
         situation=Situation.TEST_ONLY, seed=7):
    return MissingSpec(ratio=ratio, pattern=pattern, mtype=mtype,
                       situation=situation, seed=seed)


class TestGenerateMissing:
    def test_iris_simple_budget_and_rows(self, iris_norm):
        d = generate_missing(iris_norm.base, spec(0.05))
        assert d.missing_count() == 30
        per_row = d.mask.sum(axis=1)
        assert (per_row <= 1).all()
        assert (per_row == 1).sum() == 30

    def test_sonar_ud_feature_balance(self, sonar):
        # floor(0.01 * 208 * 60) = 124 = 60*2 + 4, so counts must be 2 or 3
        d = generate_missing(normalize(sonar).base,
                             spec(0.01, Pattern.SIMPLE, MissingType.UD))
        assert d.missing_count() == 124
        per_feature = d.mask.sum(axis=0)
        counts = sorted(set(per_feature.tolist()))
        assert counts == [2, 3]
        assert (per_feature == 3).sum() == 4

    def test_complex_per_row_counts_m4(self, iris_norm):
        d = generate_missing(iris_norm.base, spec(0.50, Pattern.COMPLEX))
        per_row = d.mask.sum(axis=1)
        affected = per_row[per_row > 0]
        assert set(affected.tolist()) <= {2, 3}

    def test_truth_holds_erased_values(self, iris_norm):
        d = generate_missing(iris_norm.base, spec(0.10, Pattern.MEDIUM))
        original = iris_norm.base.features
        assert np.array_equal(d.truth[d.mask], original[d.mask])
        assert np.isnan(d.truth[~d.mask]).all()
        assert np.isnan(d.base.features[d.mask]).all()

    def test_every_row_keeps_observed_value(self, iris_norm):
        for pattern in Pattern:
            d = generate_missing(iris_norm.base, spec(0.25, pattern))
            assert (~d.mask).sum(axis=1).min() >= 1

    def test_deterministic(self, iris_norm):
        a = generate_missing(iris_norm.base, spec(0.25, Pattern.MEDIUM, MissingType.UD))
        b = generate_missing(iris_norm.base, spec(0.25, Pattern.MEDIUM, MissingType.UD))
        assert np.array_equal(a.mask, b.mask)

    def test_different_seeds_differ(self, iris_norm):
        a = generate_missing(iris_norm.base, spec(0.25, seed=1))
        b = generate_missing(iris_norm.base, spec(0.25, seed=2))
        assert not np.array_equal(a.mask, b.mask)

    def test_simple_infeasible_budget(self, iris_norm):
        with pytest.raises(InfeasibleMaskError, match="caps at n"):
            generate_missing(iris_norm.base, spec(0.50))

    def test_complex_needs_three_features(self, tmp_path):
        from moimpute.datasets import load_csv

        path = tmp_path / "narrow.csv"
        path.write_text("a,b,label\n1,2,x\n3,4,y\n5,6,x\n7,8,y\n")
        d = normalize(load_csv(path, "label"))
        with pytest.raises(InfeasibleMaskError, match="m >= 3"):
            generate_missing(d.base, spec(0.25, Pattern.COMPLEX))

    def test_grid_feasible_combinations_on_iris(self, iris_norm):
        """Every canonical combination either meets its contract exactly or
        raises the documented infeasibility error (simple at high ratios)."""
        n, m = iris_norm.n, iris_norm.m
        for sp in grid_specs(seed=3):
            budget = math.floor(sp.ratio * n * m)
            try:
                d = generate_missing(iris_norm.base, sp)
            except InfeasibleMaskError:
                assert sp.pattern is Pattern.SIMPLE and budget > n
                continue
            assert d.missing_count() == budget
            per_row = d.mask.sum(axis=1)
            if sp.pattern is Pattern.SIMPLE:
                assert per_row.max() <= 1
            elif sp.pattern is Pattern.MEDIUM:
                assert per_row.max() <= math.ceil(0.5 * m)
            else:
                assert per_row.max() <= math.floor(0.8 * m)
            if sp.mtype is MissingType.UD:
                per_feature = d.mask.sum(axis=0)
                assert per_feature.max() - per_feature.min() <= 1

    def test_canonical_grid_is_30_combinations(self):
        assert len(grid_specs()) == 30
        assert len(CANONICAL_RATIOS) == 5


class TestApplySituation:
    def test_test_only_leaves_train_complete(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        train_m, test_m = apply_situation(train, test, spec(0.10))
        assert not train_m.mask.any()
        assert test_m.missing_count() == 18  # floor(0.10 * 45 * 4)

    def test_train_and_test_masks_both(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        train_m, test_m = apply_situation(
            train, test, spec(0.10, situation=Situation.TRAIN_AND_TEST))
        assert train_m.missing_count() == 42  # floor(0.10 * 105 * 4)
        assert test_m.missing_count() == 18

    def test_same_test_mask_across_situations(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        _, test_a = apply_situation(train, test, spec(0.10))
        _, test_b = apply_situation(
            train, test, spec(0.10, situation=Situation.TRAIN_AND_TEST))
        assert np.array_equal(test_a.mask, test_b.mask)

    def test_zero_ratio_yields_empty_masks(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        train_m, test_m = apply_situation(
            train, test, spec(0.0, situation=Situation.TRAIN_AND_TEST))
        assert not train_m.mask.any() and not test_m.mask.any()

    def test_incomplete_input_rejected(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        _, test_m = apply_situation(train, test, spec(0.10))
        with pytest.raises(ValueError, match="complete"):
            apply_situation(train, test_m, spec(0.10))


def test_mask_pairs_roundtrip(iris_norm):
    d = generate_missing(iris_norm.base, spec(0.05))
    pairs = mask_to_pairs(d)
    assert len(pairs) == d.missing_count()
    assert pairs == sorted(pairs)
    rebuilt = np.zeros_like(d.mask)
    for r, c in pairs:
        rebuilt[r, c] = True
    assert np.array_equal(rebuilt, d.mask)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moimpute.fuzzy import (
    ClusterConfig,
    fcm_objective,
    impute,
    mean_impute,
    membership,
    memberships,
)


def direct_membership(x, centers, v):
    """Independent single-point evaluation of the inverse-distance-ratio
    formula, term by term (the production code computes it vectorized)."""
    d2 = [float(np.sum((x - c) ** 2)) for c in centers]
    zero = [k for k, d in enumerate(d2) if d <= 1e-12]
    if zero:
        return np.array([1.0 / len(zero) if k in zero else 0.0
                         for k in range(len(centers))])
    u = []
    for k in range(len(centers)):
        total = sum((d2[k] / d2[j]) ** (1.0 / (v - 1.0)) for j in range(len(centers)))
        u.append(1.0 / total)
    return np.array(u)


class TestMeanImpute:
    def test_column_mean(self):
        values = np.array([[0.0], [1.0], [np.nan]])
        mask = np.isnan(values)
        filled = mean_impute(values, mask)
        assert filled[2, 0] == 0.5

    def test_identity_when_nothing_masked(self, rng):
        values = rng.random((6, 3))
        filled = mean_impute(values, np.zeros_like(values, dtype=bool))
        assert np.array_equal(filled, values)

    def test_filled_cells_stay_in_unit_interval(self, iris_norm, rng):
        from moimpute.missing import MissingSpec, Pattern, generate_missing

        masked = generate_missing(
            iris_norm.base, MissingSpec(ratio=0.05, pattern=Pattern.SIMPLE, seed=2))
        filled = mean_impute(masked.base.features, masked.mask)
        assert filled.min() >= 0.0 and filled.max() <= 1.0

    def test_fully_missing_column_rejected(self):
        values = np.array([[np.nan, 1.0], [np.nan, 2.0]])
        with pytest.raises(ValueError, match="fully missing"):
            mean_impute(values, np.isnan(values))


class TestMembership:
    def test_point_on_center_is_one_hot(self):
        cfg = ClusterConfig(np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]), 2.0)
        u = membership(np.array([0.5, 0.5]), cfg)
        assert u.tolist() == [0.0, 1.0, 0.0]

    def test_equidistant_centers_split_mass(self):
        cfg = ClusterConfig(np.array([[0.2], [0.8]]), 3.7)
        u = membership(np.array([0.5]), cfg)
        assert u == pytest.approx([0.5, 0.5])

    def test_two_center_value_matches_direct_formula(self):
        # x=0, centers 0.2 and 0.8, v=2:
        # u1 = (1 + 0.04/0.64)^-1 = 0.941176...
        centers = np.array([[0.2], [0.8]])
        cfg = ClusterConfig(centers, 2.0)
        u = membership(np.array([0.0]), cfg)
        assert u == pytest.approx([0.9412, 0.0588], abs=1e-4)
        assert u == pytest.approx(direct_membership(np.array([0.0]), centers, 2.0))

    def test_coincident_centers_share_mass(self):
        cfg = ClusterConfig(np.array([[0.3], [0.3], [0.9]]), 2.0)
        u = membership(np.array([0.3]), cfg)
        assert u == pytest.approx([0.5, 0.5, 0.0])

    @given(
        st.integers(min_value=2, max_value=6),
        st.integers(min_value=1, max_value=4),
        st.floats(min_value=1.5, max_value=5.0),
        st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=80, deadline=None)
    def test_rows_are_distributions(self, c, m, v, seed):
        r = np.random.default_rng(seed)
        cfg = ClusterConfig(r.random((c, m)), v)
        u = memberships(r.random((8, m)), cfg)
        assert np.all(u >= 0.0) and np.all(u <= 1.0 + 1e-12)
        assert np.abs(u.sum(axis=1) - 1.0).max() <= 1e-9

    def test_matches_direct_formula_on_random_draws(self, rng):
        for _ in range(100):
            c, m = rng.integers(2, 7), rng.integers(1, 5)
            v = rng.uniform(1.5, 5.0)
            centers = rng.random((c, m))
            x = rng.random(m)
            got = membership(x, ClusterConfig(centers, v))
            assert got == pytest.approx(direct_membership(x, centers, v), abs=1e-10)

    def test_continuity_near_a_point(self, rng):
        cfg = ClusterConfig(rng.random((4, 3)), 2.5)
        x = rng.random(3)
        u0 = membership(x, cfg)
        u1 = membership(x + 1e-8, cfg)
        assert np.abs(u1 - u0).max() < 1e-5


class TestImpute:
    def test_one_hot_membership_copies_center(self):
        centers = np.array([[0.1, 0.9], [0.7, 0.3]])
        cfg = ClusterConfig(centers, 2.0)
        values = np.array([[0.7, np.nan]])
        mask = np.isnan(values)
        baseline = np.array([[0.7, 0.3]])  # sits exactly on center 2
        out = impute(values, mask, cfg, baseline)
        assert out[0, 1] == 0.3

    def test_uniform_membership_averages_centers(self):
        centers = np.array([[0.2], [0.6]])
        cfg = ClusterConfig(centers, 2.0)
        values = np.array([[np.nan]])
        baseline = np.array([[0.4]])  # equidistant
        out = impute(values, np.array([[True]]), cfg, baseline)
        assert out[0, 0] == pytest.approx(0.4)

    def test_no_mask_returns_input(self, rng):
        values = rng.random((5, 3))
        cfg = ClusterConfig(rng.random((3, 3)), 2.0)
        out = impute(values, np.zeros_like(values, dtype=bool), cfg, values)
        assert np.array_equal(out, values)

    def test_observed_cells_bit_unchanged(self, rng):
        values = rng.random((10, 4))
        mask = rng.random((10, 4)) < 0.3
        mask[:, 0] = False  # keep at least one observed column
        original = np.where(mask, np.nan, values)
        cfg = ClusterConfig(rng.random((4, 4)), 2.2)
        baseline = mean_impute(original, mask)
        out = impute(original, mask, cfg, baseline)
        assert np.array_equal(out[~mask], original[~mask])

    def test_imputed_values_are_convex_combinations(self, rng):
        for _ in range(30):
            c, m, n = rng.integers(2, 8), rng.integers(1, 5), 12
            centers = rng.random((c, m))
            cfg = ClusterConfig(centers, rng.uniform(1.5, 5.0))
            mask = rng.random((n, m)) < 0.4
            values = np.where(mask, np.nan, rng.random((n, m)))
            baseline = rng.random((n, m))
            out = impute(values, mask, cfg, baseline)
            lows, highs = centers.min(axis=0), centers.max(axis=0)
            for j in range(m):
                cells = out[mask[:, j], j]
                if len(cells):
                    assert (cells >= lows[j] - 1e-12).all()
                    assert (cells <= highs[j] + 1e-12).all()


class TestFcmObjective:
    def test_zero_when_points_sit_on_centers(self):
        centers = np.array([[0.0, 0.0], [1.0, 1.0]])
        cfg = ClusterConfig(centers, 2.0)
        data = centers.copy()
        u = np.eye(2)
        assert fcm_objective(data, cfg, u) == 0.0

    def test_single_point_unit_distance(self):
        cfg = ClusterConfig(np.array([[1.0]]), 2.0)
        assert fcm_objective(np.array([[0.0]]), cfg, np.array([[1.0]])) == 1.0

    def test_formula_memberships_minimize_it(self, rng):
        """Closed-form memberships beat random row-stochastic matrices."""
        data = rng.random((12, 3))
        cfg = ClusterConfig(rng.random((4, 3)), 2.4)
        u_star = memberships(data, cfg)
        best = fcm_objective(data, cfg, u_star)
        for _ in range(100):
            u = rng.random((12, 4))
            u /= u.sum(axis=1, keepdims=True)
            assert best <= fcm_objective(data, cfg, u) + 1e-12

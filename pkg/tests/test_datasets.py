import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moimpute.datasets import (
    DataError,
    load_csv,
    normalize,
    split,
)
from moimpute.harness import dataset_path, load_dataset


def write_csv(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_iris_shape_and_classes(self, iris):
        assert iris.n == 150
        assert iris.m == 4
        assert iris.base.n_classes == 3
        assert not iris.mask.any()
        assert iris.truth is None

    def test_complete_file_has_empty_mask(self, tmp_path):
        path = write_csv(tmp_path, "a,b,label\n1,2,x\n3,4,y\n5,6,x\n")
        d = load_csv(path, "label")
        assert not d.mask.any()

    def test_single_missing_cell(self, tmp_path):
        path = write_csv(tmp_path, "a,b,label\n1,2,x\n?,4,y\n5,6,x\n")
        d = load_csv(path, "label")
        assert d.mask.sum() == 1
        assert d.mask[1, 0]
        assert np.isnan(d.base.features[1, 0])

    def test_categorical_columns_become_level_codes(self, tmp_path):
        path = write_csv(tmp_path, "color,n,label\nred,1,x\nblue,2,y\nred,3,x\n")
        d = load_csv(path, "label")
        spec = d.base.feature_specs[0]
        assert spec.kind == "categorical"
        assert spec.levels == ("blue", "red")
        assert d.base.features[:, 0].tolist() == [1.0, 0.0, 1.0]

    def test_zoo_fixture_mixes_kinds(self):
        zoo = load_dataset("zoo")
        kinds = {s.kind for s in zoo.base.feature_specs}
        assert kinds == {"numeric", "categorical"}
        assert zoo.n == 101
        assert zoo.base.n_classes == 7

    def test_missing_token_in_label_rejected(self, tmp_path):
        path = write_csv(tmp_path, "a,label\n1,x\n2,?\n3,x\n")
        with pytest.raises(DataError, match="label"):
            load_csv(path, "label")

    def test_mostly_missing_column_rejected(self, tmp_path):
        path = write_csv(tmp_path, "a,label\n?,x\n?,y\n3,x\n")
        with pytest.raises(DataError, match="fewer than 2"):
            load_csv(path, "label")

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_csv(tmp_path / "nope.csv", "label")

    def test_single_class_rejected(self, tmp_path):
        path = write_csv(tmp_path, "a,label\n1,x\n2,x\n")
        with pytest.raises(DataError, match="classes"):
            load_csv(path, "label")


class TestNormalize:
    def test_affine_map(self, tmp_path):
        path = write_csv(tmp_path, "a,label\n2,x\n4,y\n6,x\n")
        d = normalize(load_csv(path, "label"))
        assert d.base.features[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_column_maps_to_half(self, tmp_path):
        path = write_csv(tmp_path, "a,b,label\n7,1,x\n7,2,y\n7,3,x\n")
        d = normalize(load_csv(path, "label"))
        assert d.base.features[:, 0].tolist() == [0.5, 0.5, 0.5]

    def test_masked_cells_ignored_in_stats(self, tmp_path):
        path = write_csv(tmp_path, "a,b,label\n1,1,x\n3,2,y\n?,3,x\n5,4,y\n")
        d = normalize(load_csv(path, "label"))
        col = d.base.features[:, 0]
        assert col[0] == 0.0 and col[1] == 0.5 and col[3] == 1.0
        assert np.isnan(col[2])
        assert d.mask[2, 0]

    def test_idempotent(self, iris):
        once = normalize(iris)
        twice = normalize(once)
        assert np.array_equal(once.base.features, twice.base.features)

    def test_values_in_unit_interval(self, iris_norm):
        feats = iris_norm.base.features
        assert np.nanmin(feats) >= 0.0 and np.nanmax(feats) <= 1.0

    @given(st.lists(st.floats(min_value=-1e6, max_value=1e6,
                              allow_nan=False), min_size=2, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_roundtrip_through_recorded_inverse(self, values):
        from moimpute.datasets import Dataset, FeatureSpec, MaskedDataset

        col = np.array(values, dtype=float)
        base = Dataset(
            col[:, None].copy(),
            np.arange(len(col)) % 2,
            (FeatureSpec(name="a", kind="numeric"),),
            ("0", "1"),
        )
        d = MaskedDataset(base=base, mask=np.zeros_like(col, dtype=bool)[:, None])
        normed = normalize(d)
        spec = normed.base.feature_specs[0]
        recovered = np.array([spec.denormalize(v)
                              for v in normed.base.features[:, 0]])
        span = max(1.0, np.abs(col).max())
        assert np.abs(recovered - col).max() <= 1e-9 * span


class TestSplit:
    def test_iris_70_30(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=1)
        assert train.n == 105 and test.n == 45

    def test_deterministic(self, iris_norm):
        a = split(iris_norm, 0.3, seed=1)
        b = split(iris_norm, 0.3, seed=1)
        assert np.array_equal(a[0].base.features, b[0].base.features)
        assert np.array_equal(a[1].base.features, b[1].base.features)

    def test_all_classes_in_both_parts(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=7)
        assert set(train.base.labels) == set(test.base.labels) == {0, 1, 2}

    def test_partition(self, iris_norm):
        train, test = split(iris_norm, 0.3, seed=3)
        combined = np.vstack([train.base.features, test.base.features])
        original = iris_norm.base.features
        assert combined.shape == original.shape
        assert (np.sort(combined, axis=0) == np.sort(original, axis=0)).all()

    def test_single_member_class_rejected(self, tmp_path):
        path = write_csv(tmp_path, "a,label\n1,x\n2,x\n3,y\n")
        d = normalize(load_csv(path, "label"))
        with pytest.raises(DataError, match="single member"):
            split(d, 0.3, seed=1)

    def test_zoo_keeps_all_seven_classes(self):
        zoo = normalize(load_dataset("zoo"))
        train, test = split(zoo, 0.3, seed=1)
        assert set(train.base.labels) == set(range(7))
        assert set(test.base.labels) == set(range(7))


def test_dataset_fixtures_exist():
    for name in ("iris", "zoo", "sonar"):
        assert dataset_path(name).exists()

"""Tabular data model: CSV ingestion, categorical encoding, min-max
normalization, and stratified train/test splitting.

Feature matrices are float arrays with NaN at missing cells; the boolean
mask is the authority on missingness, the NaN is only there so that
accidental arithmetic on a missing cell surfaces immediately.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
import csv

import numpy as np

DEFAULT_MISSING_TOKENS = frozenset({"?", "NA", ""})


class DataError(ValueError):
    """An input table violates the loader's or splitter's contract."""


@dataclass(frozen=True)
class FeatureSpec:
    """Per-column metadata; carries what is needed to invert normalization."""

    name: str
    kind: str                       # "numeric" | "categorical"
    levels: tuple[str, ...] = ()    # categorical levels, index = level code
    minimum: float = 0.0
    maximum: float = 1.0

    def denormalize(self, value: float) -> float:
        if self.maximum > self.minimum:
            return value * (self.maximum - self.minimum) + self.minimum
        return self.minimum


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray            # (n, m) float
    labels: np.ndarray              # (n,) int class ids 0..q-1
    feature_specs: tuple[FeatureSpec, ...]
    class_names: tuple[str, ...]    # class id -> original label token

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if len(self.labels) != self.features.shape[0]:
            raise DataError("labels length must match the row count")
        if len(self.feature_specs) != self.features.shape[1]:
            raise DataError("feature_specs length must match the column count")
        if len(set(self.labels.tolist())) < 2:
            raise DataError("need at least 2 distinct classes")
        self.features.flags.writeable = False
        self.labels.flags.writeable = False

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


@dataclass(frozen=True)
class MaskedDataset:
    """A dataset plus a missingness mask and, when the mask was generated
    from complete data, the erased ground-truth values."""

    base: Dataset
    mask: np.ndarray                # (n, m) bool, True = missing
    truth: np.ndarray | None = None  # original values at masked cells, NaN elsewhere

    def __post_init__(self):
        if self.mask.shape != self.base.features.shape:
            raise DataError("mask shape must match the feature matrix")
        if self.mask.dtype != np.bool_:
            raise DataError("mask must be boolean")
        if self.mask.any(axis=1).any() and (~self.mask).sum(axis=1).min() == 0:
            raise DataError("every row must keep at least one observed value")
        self.mask.flags.writeable = False
        if self.truth is not None:
            if self.truth.shape != self.mask.shape:
                raise DataError("truth shape must match the feature matrix")
            self.truth.flags.writeable = False

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    def missing_count(self) -> int:
        return int(self.mask.sum())


def _parse_column(raw: list[str], observed: np.ndarray, name: str):
    """Return (values, spec) for one column; numeric when every observed
    cell parses as a float, categorical (sorted level codes) otherwise."""
    values = np.full(len(raw), np.nan)
    try:
        values[observed] = [float(raw[i]) for i in np.flatnonzero(observed)]
        return values, FeatureSpec(name=name, kind="numeric")
    except ValueError:
        pass
    levels = sorted({raw[i] for i in np.flatnonzero(observed)})
    code = {tok: float(i) for i, tok in enumerate(levels)}
    for i in np.flatnonzero(observed):
        values[i] = code[raw[i]]
    return values, FeatureSpec(name=name, kind="categorical", levels=tuple(levels))


def load_csv(
    path: str | Path,
    label_column: str,
    missing_tokens: frozenset[str] | set[str] = DEFAULT_MISSING_TOKENS,
) -> MaskedDataset:
    """Read a header-ed CSV into a MaskedDataset (truth absent).

    Cells matching a missing token are masked; the label column must be
    complete. Columns whose observed cells all parse as floats become
    numeric, anything else becomes integer level codes.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path} needs a header row and at least one data row")
    header, records = rows[0], rows[1:]
    if label_column not in header:
        raise DataError(f"label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column)

    tokens = frozenset(missing_tokens)
    raw_labels = [r[label_idx].strip() for r in records]
    if any(tok in tokens for tok in raw_labels):
        raise DataError("label column contains a missing token")
    class_names = tuple(sorted(set(raw_labels)))
    label_code = {name: i for i, name in enumerate(class_names)}
    labels = np.array([label_code[tok] for tok in raw_labels], dtype=np.intp)

    columns, specs = [], []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        raw = [r[j].strip() for r in records]
        observed = np.array([tok not in tokens for tok in raw])
        if observed.sum() < 2:
            raise DataError(f"column {name!r} has fewer than 2 observed values")
        values, spec = _parse_column(raw, observed, name)
        columns.append(values)
        specs.append(spec)

    features = np.column_stack(columns)
    base = Dataset(features, labels, tuple(specs), class_names)
    return MaskedDataset(base=base, mask=np.isnan(features))


def normalize(d: MaskedDataset) -> MaskedDataset:
    """Min-max scale every column to [0, 1] using observed values only.

    Constant columns map to 0.5. The observed min/max are recorded on the
    feature specs so values can be mapped back to original units.
    """
    values = d.base.features.copy()
    specs = []
    for j, spec in enumerate(d.base.feature_specs):
        col = values[:, j]
        observed = ~d.mask[:, j]
        lo = float(np.nanmin(col[observed]))
        hi = float(np.nanmax(col[observed]))
        if hi > lo:
            col[observed] = (col[observed] - lo) / (hi - lo)
        else:
            col[observed] = 0.5
        specs.append(replace(spec, minimum=lo, maximum=hi))
    truth = d.truth
    if truth is not None:
        truth = truth.copy()
        for j, spec in enumerate(specs):
            span = spec.maximum - spec.minimum
            if span > 0:
                truth[:, j] = (truth[:, j] - spec.minimum) / span
            else:
                truth[d.mask[:, j], j] = 0.5
    base = Dataset(values, d.base.labels.copy(), tuple(specs), d.base.class_names)
    return MaskedDataset(base=base, mask=d.mask.copy(), truth=truth)


def split(
    d: MaskedDataset, test_fraction: float, seed: int
) -> tuple[MaskedDataset, MaskedDataset]:
    """Stratified random split; deterministic given the seed.

    Each class contributes round(test_fraction * class size) test rows,
    clamped so both parts keep every class.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must be in (0, 1)")
    rng = np.random.default_rng(seed)
    labels = d.base.labels
    test_rows = []
    for cls in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == cls)
        if len(members) < 2:
            raise DataError(f"class {cls} has a single member and cannot be split")
        n_test = int(np.floor(test_fraction * len(members) + 0.5))
        n_test = min(max(n_test, 1), len(members) - 1)
        picked = rng.permutation(members)[:n_test]
        test_rows.extend(picked.tolist())
    test_idx = np.array(sorted(test_rows), dtype=np.intp)
    train_idx = np.setdiff1d(np.arange(d.n), test_idx)
    return _take(d, train_idx), _take(d, test_idx)


def _take(d: MaskedDataset, idx: np.ndarray) -> MaskedDataset:
    base = Dataset(
        d.base.features[idx].copy(),
        d.base.labels[idx].copy(),
        d.base.feature_specs,
        d.base.class_names,
    )
    truth = d.truth[idx].copy() if d.truth is not None else None
    return MaskedDataset(base=base, mask=d.mask[idx].copy(), truth=truth)


def concat_parts(train: MaskedDataset, test: MaskedDataset):
    """Stack train over test for transductive imputation.

    Returns (values, mask, truth) where truth is None when neither part
    carries ground truth.
    """
    values = np.vstack([train.base.features, test.base.features])
    mask = np.vstack([train.mask, test.mask])
    if train.truth is None and test.truth is None:
        truth = None
    else:
        tr = train.truth if train.truth is not None else np.full(train.mask.shape, np.nan)
        te = test.truth if test.truth is not None else np.full(test.mask.shape, np.nan)
        truth = np.vstack([tr, te])
    return values, mask, truth

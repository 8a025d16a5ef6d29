"""Reproducible missing-value mask generation.

A mask is described by a ratio (fraction of cells erased), a pattern
bounding how many cells an affected row loses (Simple: exactly 1;
Medium: 2 to 50% of the features; Complex: 50% to 80%), and a type
(Overall: cells land anywhere; UD: per-feature counts are balanced to
within one cell). Labels are never masked and every row keeps at least
one observed value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
import math

import numpy as np

from .datasets import Dataset, MaskedDataset

CANONICAL_RATIOS = (0.01, 0.05, 0.10, 0.25, 0.50)


class Pattern(str, Enum):
    SIMPLE = "simple"
    MEDIUM = "medium"
    COMPLEX = "complex"


class MissingType(str, Enum):
    OVERALL = "overall"
    UD = "ud"


class Situation(str, Enum):
    TEST_ONLY = "test_only"
    TRAIN_AND_TEST = "train_and_test"


class InfeasibleMaskError(ValueError):
    """The requested cell budget cannot be met under the pattern."""


@dataclass(frozen=True)
class MissingSpec:
    ratio: float
    pattern: Pattern = Pattern.SIMPLE
    mtype: MissingType = MissingType.OVERALL
    situation: Situation = Situation.TEST_ONLY
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ratio < 1.0:
            raise ValueError("ratio must lie in [0, 1)")


def grid_specs(seed: int = 0, situation: Situation = Situation.TEST_ONLY):
    """The canonical 5 ratios x 3 patterns x 2 types = 30 combinations."""
    return [
        MissingSpec(ratio=r, pattern=p, mtype=t, situation=situation, seed=seed)
        for r in CANONICAL_RATIOS
        for p in Pattern
        for t in MissingType
    ]


def _row_count_range(pattern: Pattern, m: int) -> tuple[int, int]:
    if pattern is Pattern.SIMPLE:
        lo, hi = 1, 1
    elif pattern is Pattern.MEDIUM:
        lo, hi = 2, math.ceil(0.5 * m)
    else:
        if m < 3:
            raise InfeasibleMaskError(f"complex pattern needs m >= 3, got {m}")
        lo, hi = math.ceil(0.5 * m), math.floor(0.8 * m)
    hi = min(hi, m - 1)  # every row keeps one observed value
    if hi < lo:
        raise InfeasibleMaskError(
            f"{pattern.value} pattern has an empty per-row range for m={m}"
        )
    return lo, hi


def _draw_row_counts(n, budget, lo, hi, rng):
    """Pick affected rows and their per-row cell counts summing to budget.

    Rows are drawn without replacement; the final row is truncated to fit.
    If the random draws undershoot (budget close to n*hi), counts are
    topped up toward hi in draw order so the budget is met exactly.
    """
    order = rng.permutation(n)
    rows, counts = [], []
    remaining = budget
    for r in order:
        if remaining <= 0:
            break
        k = lo if lo == hi else int(rng.integers(lo, hi + 1))
        k = min(k, remaining)
        rows.append(int(r))
        counts.append(k)
        remaining -= k
    for i in range(len(counts)):
        if remaining <= 0:
            break
        bump = min(hi - counts[i], remaining)
        counts[i] += bump
        remaining -= bump
    if remaining > 0:
        raise InfeasibleMaskError(
            f"budget {budget} not reachable with per-row counts in [{lo}, {hi}]"
        )
    return rows, counts


def _place_overall(rows, counts, m, rng):
    cells = []
    for r, k in zip(rows, counts):
        for j in rng.choice(m, size=k, replace=False):
            cells.append((r, int(j)))
    return cells


def _place_balanced(rows, counts, m, rng):
    """Assign each row's cells to features so per-feature totals differ by
    at most one: every row takes the features with the largest remaining
    quota (ties broken at random)."""
    budget = sum(counts)
    quota = np.full(m, budget // m, dtype=float)
    extra = rng.choice(m, size=budget % m, replace=False)
    quota[extra] += 1
    cells = []
    order = np.argsort(-np.asarray(counts), kind="stable")  # big demands first
    for i in order:
        r, k = rows[i], counts[i]
        keys = quota + rng.random(m) * 0.5  # random tie-break, < quota gap
        picked = np.argsort(-keys, kind="stable")[:k]
        if quota[picked].min() <= 0:
            raise InfeasibleMaskError("per-feature balancing ran out of quota")
        quota[picked] -= 1
        for j in picked:
            cells.append((r, int(j)))
    return cells


def generate_missing(complete: Dataset, spec: MissingSpec) -> MaskedDataset:
    """Erase exactly floor(ratio*n*m) cells from a complete dataset.

    The erased values are kept as ground truth for later scoring.
    Deterministic given spec.seed.
    """
    n, m = complete.n, complete.m
    if np.isnan(complete.features).any():
        raise ValueError("generate_missing expects complete data")
    budget = math.floor(spec.ratio * n * m)
    mask = np.zeros((n, m), dtype=bool)
    if budget == 0:
        return MaskedDataset(base=complete, mask=mask, truth=np.full((n, m), np.nan))

    lo, hi = _row_count_range(spec.pattern, m)
    if spec.pattern is Pattern.SIMPLE and budget > n:
        raise InfeasibleMaskError(
            f"simple pattern caps at n={n} cells, budget is {budget}"
        )
    if budget > n * hi:
        raise InfeasibleMaskError(
            f"budget {budget} exceeds n*max_per_row = {n * hi}"
        )

    rng = np.random.default_rng(spec.seed)
    rows, counts = _draw_row_counts(n, budget, lo, hi, rng)
    if spec.mtype is MissingType.OVERALL:
        cells = _place_overall(rows, counts, m, rng)
    else:
        cells = _place_balanced(rows, counts, m, rng)

    for r, j in cells:
        mask[r, j] = True
    assert int(mask.sum()) == budget

    truth = np.where(mask, complete.features, np.nan)
    features = np.where(mask, np.nan, complete.features)
    base = Dataset(features, complete.labels.copy(), complete.feature_specs,
                   complete.class_names)
    return MaskedDataset(base=base, mask=mask, truth=truth)


def situation_seeds(seed: int) -> tuple[int, int]:
    """Derived (train, test) mask seeds; the test seed is the same in both
    situations so test-only and train-and-test runs see the same test mask."""
    state = np.random.SeedSequence(seed).generate_state(2)
    return int(state[0]), int(state[1])


def apply_situation(
    train: MaskedDataset, test: MaskedDataset, spec: MissingSpec
) -> tuple[MaskedDataset, MaskedDataset]:
    """Generate masks on the split parts according to the situation.

    Test-only leaves the train part complete; train-and-test masks both
    parts independently at the spec's ratio.
    """
    if train.mask.any() or test.mask.any():
        raise ValueError("apply_situation expects complete inputs")
    train_seed, test_seed = situation_seeds(spec.seed)
    masked_test = generate_missing(test.base, replace(spec, seed=test_seed))
    if spec.situation is Situation.TEST_ONLY:
        blank = MaskedDataset(
            base=train.base,
            mask=np.zeros_like(train.mask),
            truth=np.full(train.mask.shape, np.nan),
        )
        return blank, masked_test
    masked_train = generate_missing(train.base, replace(spec, seed=train_seed))
    return masked_train, masked_test


def mask_to_pairs(d: MaskedDataset) -> list[tuple[int, int]]:
    """Masked cells as sorted (row, column) pairs, for export."""
    rows, cols = np.nonzero(d.mask)
    return sorted(zip(rows.tolist(), cols.tolist()))

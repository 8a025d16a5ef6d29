"""The two optimization objectives: an imputation score (one of three
formulations, maximized) and the 10-fold cross-validated classification
error (minimized).

Imputation formulations:

- ASW: average silhouette width of the imputed points under the
  argmax-membership cluster assignment, in [-1, 1].
- Correlation: Pearson correlation of the train and test per-row feature
  sums after sorting and quantile alignment, in [-1, 1].
- VR: ratio min/max of the row-sum variances of the two parts, in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import svm


class Formulation(str, Enum):
    ASW = "asw"
    CORRELATION = "correlation"
    VR = "vr"


WORST_IMPUTATION_VALUE = {
    Formulation.ASW: -1.0,
    Formulation.CORRELATION: -1.0,
    Formulation.VR: 0.0,
}
WORST_CV_ERROR = 1.0


class ObjectiveUndefinedError(ValueError):
    """The objective has no defined value for this input (the caller
    should fall back to the worst value)."""


@dataclass(frozen=True)
class ObjectivePair:
    imputation_value: float   # maximize
    cv_error: float           # minimize
    formulation: Formulation


def asw(data: np.ndarray, assignment: np.ndarray) -> float:
    """Average silhouette width over all points.

    Singleton-cluster points and coincident points (a = b = 0) score 0.
    Raises ObjectiveUndefinedError when fewer than 2 clusters are
    populated.
    """
    assignment = np.asarray(assignment)
    clusters = np.unique(assignment)
    if len(clusters) < 2:
        raise ObjectiveUndefinedError("silhouette needs at least 2 populated clusters")
    n = len(data)
    d2 = np.maximum(
        (data * data).sum(axis=1)[:, None]
        + (data * data).sum(axis=1)[None, :]
        - 2.0 * (data @ data.T),
        0.0,
    )
    dist = np.sqrt(d2)
    onehot = assignment[:, None] == clusters[None, :]
    counts = onehot.sum(axis=0)
    sums = dist @ onehot  # (n, k) total distance to each cluster

    own_col = np.argmax(onehot, axis=1)
    own_counts = counts[own_col]
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[np.arange(n), own_col] / np.maximum(own_counts - 1, 1)
        mean_to = sums / counts[None, :]
    mean_to[onehot] = np.inf
    b = mean_to.min(axis=1)

    denom = np.maximum(a, b)
    s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.where(own_counts == 1, 0.0, s)
    return float(s.mean())


def _row_sums_aligned(x_tr: np.ndarray, x_te: np.ndarray):
    """Sorted row sums of both matrices, the shorter linearly interpolated
    onto the longer's quantile grid."""
    a = np.sort(x_tr.sum(axis=1))
    b = np.sort(x_te.sum(axis=1))
    if len(a) == len(b):
        return a, b
    if len(a) < len(b):
        a = np.interp(np.linspace(0, 1, len(b)), np.linspace(0, 1, len(a)), a)
    else:
        b = np.interp(np.linspace(0, 1, len(a)), np.linspace(0, 1, len(b)), b)
    return a, b


def correlation_obj(x_tr: np.ndarray, x_te: np.ndarray) -> float:
    """Distributional agreement of the two parts' row-sum profiles.

    Returns 0 when either row-sum sequence has no spread (uninformative
    imputation).
    """
    if len(x_tr) == 0 or len(x_te) == 0:
        raise ValueError("both matrices must be non-empty")
    if len(x_tr) < 2 or len(x_te) < 2:
        return 0.0
    if np.var(x_tr.sum(axis=1), ddof=1) == 0 or np.var(x_te.sum(axis=1), ddof=1) == 0:
        return 0.0
    a, b = _row_sums_aligned(x_tr, x_te)
    if np.var(a) == 0 or np.var(b) == 0:
        return 0.0
    return float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))


def variance_ratio(x_tr: np.ndarray, x_te: np.ndarray) -> float:
    """min/max of the row-sum variances; 1 means equal spread."""
    if len(x_tr) == 0 or len(x_te) == 0:
        raise ValueError("both matrices must be non-empty")
    s_tr = float(np.var(x_tr.sum(axis=1), ddof=1)) if len(x_tr) > 1 else 0.0
    s_te = float(np.var(x_te.sum(axis=1), ddof=1)) if len(x_te) > 1 else 0.0
    if s_tr == 0.0 and s_te == 0.0:
        return 1.0
    if s_tr == 0.0 or s_te == 0.0:
        return 0.0
    return min(s_tr, s_te) / max(s_tr, s_te)


def imputation_objective(
    formulation: Formulation,
    imputed: np.ndarray,
    n_train: int,
    assignment: np.ndarray | None = None,
) -> float:
    """Dispatch over the three formulations on a concatenated imputed
    matrix (train rows first)."""
    if formulation is Formulation.ASW:
        if assignment is None:
            raise ValueError("ASW needs the cluster assignment")
        return asw(imputed, assignment)
    if formulation is Formulation.CORRELATION:
        return correlation_obj(imputed[:n_train], imputed[n_train:])
    return variance_ratio(imputed[:n_train], imputed[n_train:])


def model_selection_obj(
    imputed_train: np.ndarray,
    labels: np.ndarray,
    cost: float,
    kernel: svm.KernelSpec,
    seed: int,
    folds: int = 10,
) -> float:
    """10-fold cross-validated classification error on the imputed train
    part (the objective to minimize)."""
    return svm.cv_error(imputed_train, labels, cost, kernel, folds=folds, seed=seed)

"""Run scoring: imputation accuracy, the complete-vs-imputed test error
pair, normalized mutual information between objective traces and ground
metrics, and the 2-D hypervolume of the first front.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
import json

import numpy as np

from . import svm
from .evo import EvaluatedChromosome
from .objectives import Formulation, ObjectivePair


def imputation_accuracy(
    imputed: np.ndarray, truth: np.ndarray, mask: np.ndarray
) -> tuple[float, float] | None:
    """(MAE, RMSE) over masked cells in normalized units, or None when
    nothing is masked (absent, not zero)."""
    cells = mask & ~np.isnan(truth)
    if not cells.any():
        return None
    err = imputed[cells] - truth[cells]
    return float(np.abs(err).mean()), float(np.sqrt((err ** 2).mean()))


def test_errors(
    front1: list[EvaluatedChromosome],
    n_train: int,
    train_labels: np.ndarray,
    test_labels: np.ndarray,
    complete_test: np.ndarray,
) -> tuple[float, float]:
    """Front-averaged (complete_test_error, imputed_test_error).

    Each front member trains its own classifier on its imputed train part
    and predicts both test variants; members whose training stalls count
    with worst-case errors.
    """
    if not front1:
        raise ValueError("front must be non-empty")
    complete_errs, imputed_errs = [], []
    for member in front1:
        try:
            model = svm.train_multiclass(
                member.imputed[:n_train], train_labels,
                member.chromosome.cost, member.chromosome.kernel,
            )
            pred_c = model.predict(complete_test)
            pred_i = model.predict(member.imputed[n_train:])
            complete_errs.append(float((pred_c != test_labels).mean()))
            imputed_errs.append(float((pred_i != test_labels).mean()))
        except svm.SvmConvergenceError:
            complete_errs.append(1.0)
            imputed_errs.append(1.0)
    return float(np.mean(complete_errs)), float(np.mean(imputed_errs))


def _equal_frequency_bins(x: np.ndarray, bins: int) -> np.ndarray:
    """Quantile-edge bin codes; tied values always share a bin."""
    edges = np.unique(np.quantile(x, np.linspace(0.0, 1.0, bins + 1)[1:-1]))
    return np.digitize(x, edges)


def nmi(x, y, bins: int = 10) -> float:
    """Normalized mutual information of two real sequences.

    Each sequence is discretized into equal-frequency (quantile) bins; MI
    is normalized by sqrt(H(X) * H(Y)), entropies in nats. Constant
    sequences give 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) != len(y):
        raise ValueError("sequences must have the same length")
    if len(x) < bins:
        raise ValueError(f"need at least {bins} samples")
    cx = _equal_frequency_bins(x, bins)
    cy = _equal_frequency_bins(y, bins)
    joint = np.zeros((cx.max() + 1, cy.max() + 1))
    np.add.at(joint, (cx, cy), 1.0)
    joint /= joint.sum()
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    mi = float((joint[nz] * np.log(joint[nz] / np.outer(px, py)[nz])).sum())
    hx = float(-(px[px > 0] * np.log(px[px > 0])).sum())
    hy = float(-(py[py > 0] * np.log(py[py > 0])).sum())
    if hx <= 0.0 or hy <= 0.0:
        return 0.0
    return min(max(mi / np.sqrt(hx * hy), 0.0), 1.0)


def map_to_unit_square(pair: ObjectivePair) -> tuple[float, float]:
    """Both axes mapped to maximize-in-[0,1]: the imputation value by its
    formulation's range, the error as 1 - cv_error."""
    if pair.formulation is Formulation.VR:
        imp = pair.imputation_value
    else:
        imp = (pair.imputation_value + 1.0) / 2.0
    return (
        float(np.clip(imp, 0.0, 1.0)),
        float(np.clip(1.0 - pair.cv_error, 0.0, 1.0)),
    )


def hypervolume(front: list[ObjectivePair]) -> float:
    """Area of the unit square dominated by the front, reference (0, 0)."""
    if not front:
        raise ValueError("front must be non-empty")
    points = sorted((map_to_unit_square(p) for p in front), key=lambda t: -t[0])
    area = 0.0
    best_y = 0.0
    for x, y in points:
        if y > best_y:
            area += x * (y - best_y)
            best_y = y
    return area


@dataclass(frozen=True)
class RunReport:
    """Everything one experiment run emits (config echo included)."""

    dataset: str
    formulation: str
    ratio: float
    pattern: str
    mtype: str
    situation: str
    seed: int
    population_size: int
    max_clusters: int
    crossover_pool: int
    max_generations: int
    threshold: float
    test_fraction: float
    # outcomes
    failed: bool = False
    error: str | None = None
    elapsed_seconds: float | None = None
    generations: int | None = None
    stop_reason: str | None = None
    front1_size: int | None = None
    mean_imputation_value: float | None = None
    mean_cv_error: float | None = None
    hypervolume: float | None = None
    complete_test_error: float | None = None
    imputed_test_error: float | None = None
    error_difference: float | None = None
    mae: float | None = None
    rmse: float | None = None
    nmi_imputation: float | None = None
    nmi_model: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls(**json.loads(text))


# stable column order for the per-run CSV row (documented in the README)
REPORT_COLUMNS = [
    "dataset", "formulation", "ratio", "pattern", "mtype", "situation",
    "seed", "population_size", "max_clusters", "crossover_pool",
    "max_generations", "threshold", "test_fraction", "failed", "error",
    "elapsed_seconds", "generations", "stop_reason", "front1_size",
    "mean_imputation_value", "mean_cv_error", "hypervolume",
    "complete_test_error", "imputed_test_error", "error_difference",
    "mae", "rmse", "nmi_imputation", "nmi_model",
]


def report_row(report: RunReport) -> list:
    data = asdict(report)
    return [data[c] for c in REPORT_COLUMNS]

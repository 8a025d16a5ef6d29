"""Fuzzy-clustering memberships and membership-weighted imputation.

Memberships follow the classic inverse-distance-ratio rule: for point x
and centers c_1..c_c,

    u_k = [ sum_j (||x-c_k||^2 / ||x-c_j||^2)^(1/(v-1)) ]^(-1)

with the degenerate branches u_k = 1 when x coincides with c_k and
u_k = 0 when x coincides with a different center. A masked cell (i, j)
is filled with sum_k u_ik * c_kj, a convex combination of the center
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ZERO_DISTANCE_TOL = 1e-12


@dataclass(frozen=True)
class ClusterConfig:
    centers: np.ndarray   # (c, m), coordinates in [0, 1]
    fuzziness: float      # v > 1

    def __post_init__(self):
        if self.centers.ndim != 2:
            raise ValueError("centers must be a (c, m) matrix")
        if self.fuzziness <= 1.0:
            raise ValueError("fuzziness must exceed 1")

    @property
    def n_clusters(self) -> int:
        return self.centers.shape[0]


def mean_impute(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Fill masked cells with their column's mean over observed values."""
    observed_counts = (~mask).sum(axis=0)
    if observed_counts.min() == 0:
        raise ValueError("cannot mean-impute a fully missing column")
    col_sums = np.where(mask, 0.0, values).sum(axis=0)
    means = col_sums / observed_counts
    return np.where(mask, means, values)


def memberships(points: np.ndarray, cfg: ClusterConfig) -> np.ndarray:
    """Membership matrix (n, c) for fully-filled points.

    Rows sum to 1. A point within ZERO_DISTANCE_TOL (squared distance) of
    one or more centers splits its mass equally among those centers.
    """
    diffs = points[:, None, :] - cfg.centers[None, :, :]
    d2 = np.einsum("nkm,nkm->nk", diffs, diffs)
    exponent = 1.0 / (cfg.fuzziness - 1.0)

    u = np.empty_like(d2)
    coincident = d2 <= ZERO_DISTANCE_TOL
    degenerate = coincident.any(axis=1)
    regular = ~degenerate
    if regular.any():
        weights = d2[regular] ** (-exponent)
        u[regular] = weights / weights.sum(axis=1, keepdims=True)
    if degenerate.any():
        rows = coincident[degenerate]
        u[degenerate] = rows / rows.sum(axis=1, keepdims=True)
    return u


def membership(x: np.ndarray, cfg: ClusterConfig) -> np.ndarray:
    """Membership vector for a single point."""
    return memberships(np.asarray(x, dtype=float)[None, :], cfg)[0]


def impute(
    values: np.ndarray,
    mask: np.ndarray,
    cfg: ClusterConfig,
    baseline: np.ndarray,
) -> np.ndarray:
    """Fill masked cells from memberships computed against the baseline.

    baseline is the mean-imputed matrix the memberships are evaluated on;
    observed cells are copied from values unchanged.
    """
    u = memberships(baseline, cfg)
    filled = u @ cfg.centers
    return np.where(mask, filled, values)


def fcm_objective(data: np.ndarray, cfg: ClusterConfig, u: np.ndarray) -> float:
    """Weighted within-cluster scatter sum_i sum_k u_ik^v ||x_i - c_k||^2.

    Used as a sanity oracle: for fixed centers the memberships above
    minimize this over row-stochastic matrices.
    """
    diffs = data[:, None, :] - cfg.centers[None, :, :]
    d2 = np.einsum("nkm,nkm->nk", diffs, diffs)
    return float(((u ** cfg.fuzziness) * d2).sum())

"""Soft-margin kernel SVM trained with pairwise coordinate ascent on the
dual (SMO with maximal-violating-pair selection), one-vs-one multiclass
wrapping, and stratified k-fold cross-validated error.

The solver keeps the decision values (without bias) incrementally, so one
update step costs O(n); the Gram matrix is computed once per training set
and sliced for folds and class pairs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit

KKT_TOL = 1e-3
ALPHA_TOL = 1e-8


class KernelKind(str, Enum):
    LINEAR = "linear"
    RADIAL = "radial"
    POLYNOMIAL = "polynomial"
    SIGMOID = "sigmoid"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = KernelKind.RADIAL
    gamma: float = 1.0    # radial / polynomial / sigmoid
    r: float = 0.0        # polynomial / sigmoid
    degree: int = 3       # polynomial

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(self.kind))
        if self.kind in (KernelKind.RADIAL, KernelKind.POLYNOMIAL,
                         KernelKind.SIGMOID) and self.gamma <= 0:
            raise ValueError("gamma must be positive")


class SvmConvergenceError(RuntimeError):
    """The dual solver did not reach the KKT tolerance within its budget."""


def kernel_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    return float(kernel_matrix(spec, np.atleast_2d(x), np.atleast_2d(y))[0, 0])


def kernel_matrix(spec: KernelSpec, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    if Y is None:
        Y = X
    if spec.kind is KernelKind.RADIAL:
        x2 = (X * X).sum(axis=1)[:, None]
        y2 = (Y * Y).sum(axis=1)[None, :]
        d2 = np.maximum(x2 + y2 - 2.0 * (X @ Y.T), 0.0)
        return np.exp(-spec.gamma * d2)
    dots = X @ Y.T
    if spec.kind is KernelKind.LINEAR:
        return dots
    if spec.kind is KernelKind.POLYNOMIAL:
        return (spec.gamma * dots + spec.r) ** spec.degree
    return np.tanh(spec.gamma * dots + spec.r)


@njit(cache=True)
def _smo_kernel(K, y, C, tol, max_steps):  # pragma: no cover - exercised via _smo
    n = y.shape[0]
    alpha = np.zeros(n)
    u = np.zeros(n)              # decision values without bias
    gap = np.inf
    for _ in range(max_steps):
        m_val = -np.inf
        M_val = np.inf
        i = -1
        j = -1
        for t in range(n):
            crit = y[t] - u[t]
            if y[t] > 0.0:
                up_ok = alpha[t] < C - ALPHA_TOL
                dn_ok = alpha[t] > ALPHA_TOL
            else:
                up_ok = alpha[t] > ALPHA_TOL
                dn_ok = alpha[t] < C - ALPHA_TOL
            if up_ok and crit > m_val:
                m_val = crit
                i = t
            if dn_ok and crit < M_val:
                M_val = crit
                j = t
        if i < 0 or j < 0:
            break
        gap = m_val - M_val
        if gap <= tol:
            break

        a1, a2 = alpha[i], alpha[j]
        y1, y2 = y[i], y[j]
        s = y1 * y2
        if s < 0.0:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        else:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        if H - L < 1e-14:
            break
        e_diff = (u[i] - y1) - (u[j] - y2)
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta > 1e-12:
            a2_new = a2 + y2 * e_diff / eta
            if a2_new < L:
                a2_new = L
            elif a2_new > H:
                a2_new = H
        else:
            # linear (or concave) slice: compare the objective at both ends
            f1 = y1 * (u[i] - y1) - a1 * K[i, i] - s * a2 * K[i, j]
            f2 = y2 * (u[j] - y2) - s * a1 * K[i, j] - a2 * K[j, j]
            L1 = a1 + s * (a2 - L)
            H1 = a1 + s * (a2 - H)
            obj_L = (L1 * f1 + L * f2 + 0.5 * L1 * L1 * K[i, i]
                     + 0.5 * L * L * K[j, j] + s * L * L1 * K[i, j])
            obj_H = (H1 * f1 + H * f2 + 0.5 * H1 * H1 * K[i, i]
                     + 0.5 * H * H * K[j, j] + s * H * H1 * K[i, j])
            if obj_L < obj_H - 1e-12:
                a2_new = L
            elif obj_H < obj_L - 1e-12:
                a2_new = H
            else:
                break
        if abs(a2_new - a2) < 1e-14:
            break
        a1_new = a1 + s * (a2 - a2_new)

        d1 = (a1_new - a1) * y1
        d2 = (a2_new - a2) * y2
        for t in range(n):
            u[t] += d1 * K[i, t] + d2 * K[j, t]
        alpha[i] = a1_new
        alpha[j] = a2_new
    return alpha, u, gap


def _smo(K: np.ndarray, y: np.ndarray, C: float,
         tol: float = KKT_TOL, max_steps: int | None = None):
    """Solve the box-constrained dual on a precomputed Gram matrix.

    Returns (alpha, bias, converged). Each step picks the maximal
    violating pair and solves the two-variable subproblem analytically;
    for non-positive curvature (indefinite kernels) the objective is
    evaluated at both box ends.
    """
    n = len(y)
    if max_steps is None:
        max_steps = max(500, 100 * n)
    alpha, u, gap = _smo_kernel(
        np.ascontiguousarray(K, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        float(C), float(tol), int(max_steps),
    )
    converged = bool(gap <= tol)

    pos = y > 0
    at_lower = alpha <= ALPHA_TOL
    at_upper = alpha >= C - ALPHA_TOL
    crit = y - u
    free = ~(at_lower | at_upper)
    if free.any():
        bias = float(crit[free].mean())
    else:
        lo = crit[np.where(pos, ~at_lower, ~at_upper)]
        hi = crit[np.where(pos, ~at_upper, ~at_lower)]
        bias = float((lo.min() + hi.max()) / 2.0) if len(lo) and len(hi) else 0.0
    return alpha, bias, converged


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Value of the dual: sum(alpha) - 1/2 sum a_i a_j y_i y_j K_ij."""
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray   # rows with nonzero multiplier
    dual_coeffs: np.ndarray       # alpha_i * y_i for those rows
    bias: float
    kernel: KernelSpec
    cost: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        if len(self.support_vectors) == 0:
            return np.full(len(X), self.bias)
        return kernel_matrix(self.kernel, X, self.support_vectors) @ self.dual_coeffs + self.bias

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(self.decision(X) >= 0.0, 1, -1)


def train_binary(X: np.ndarray, y: np.ndarray, C: float, kernel: KernelSpec,
                 tol: float = KKT_TOL) -> SvmModel:
    """Train on +/-1 labels; raises SvmConvergenceError when the KKT gap
    never falls below tol within the step budget."""
    y = np.asarray(y, dtype=float)
    if not ((y == 1).any() and (y == -1).any()):
        raise ValueError("both labels must be present")
    if C <= 0:
        raise ValueError("C must be positive")
    K = kernel_matrix(kernel, X)
    alpha, bias, converged = _smo(K, y, C, tol=tol)
    if not converged:
        raise SvmConvergenceError(
            f"SMO stalled above tolerance (kernel={kernel.kind.value}, C={C})"
        )
    keep = alpha > ALPHA_TOL
    return SvmModel(
        support_vectors=X[keep].copy(),
        dual_coeffs=(alpha * y)[keep],
        bias=bias,
        kernel=kernel,
        cost=C,
    )


@dataclass(frozen=True)
class MulticlassModel:
    classes: tuple[int, ...]
    # (class_a, class_b, model); +1 decision votes for class_a (the lower id)
    pair_models: tuple[tuple[int, int, SvmModel], ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((len(X), len(self.classes)), dtype=int)
        col = {c: k for k, c in enumerate(self.classes)}
        for a, b, model in self.pair_models:
            pred = model.predict(X)
            votes[pred == 1, col[a]] += 1
            votes[pred == -1, col[b]] += 1
        winners = np.argmax(votes, axis=1)  # first max -> lowest class id
        return np.array([self.classes[k] for k in winners], dtype=np.intp)


def train_multiclass(X: np.ndarray, y: np.ndarray, C: float,
                     kernel: KernelSpec) -> MulticlassModel:
    """One-vs-one with majority voting; ties go to the lowest class id."""
    classes = sorted(set(np.asarray(y).tolist()))
    if len(classes) < 2:
        raise ValueError("need at least 2 classes")
    pair_models = []
    for ai in range(len(classes)):
        for bi in range(ai + 1, len(classes)):
            a, b = classes[ai], classes[bi]
            sel = (y == a) | (y == b)
            ypair = np.where(y[sel] == a, 1.0, -1.0)
            pair_models.append((a, b, train_binary(X[sel], ypair, C, kernel)))
    return MulticlassModel(classes=tuple(classes), pair_models=tuple(pair_models))


def predict(model: SvmModel | MulticlassModel, X: np.ndarray) -> np.ndarray:
    """Deterministic labels for rows of X (empty input allowed)."""
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        return np.array([], dtype=np.intp)
    return model.predict(X)


def fold_assignment(labels: np.ndarray, folds: int, seed: int) -> np.ndarray:
    """Stratified fold ids; a pure function of (seed, n, labels)."""
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(labels), dtype=int)
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        perm = rng.permutation(idx)
        start = int(rng.integers(folds))
        fold_of[perm] = (np.arange(len(idx)) + start) % folds
    return fold_of


def cv_error(X: np.ndarray, y: np.ndarray, C: float, kernel: KernelSpec,
             folds: int = 10, seed: int = 0) -> float:
    """Stratified k-fold misclassification rate.

    Class pairs that lose a class inside a training fold simply cast no
    vote there; classes smaller than the fold count are capped naturally
    by the round-robin assignment.
    """
    y = np.asarray(y)
    n = len(y)
    if folds < 2:
        raise ValueError("folds must be at least 2")
    K = kernel_matrix(kernel, X)
    fold_of = fold_assignment(y, folds, seed)
    classes = sorted(set(y.tolist()))
    miss = 0
    for f in range(folds):
        test_idx = np.flatnonzero(fold_of == f)
        if len(test_idx) == 0:
            continue
        train_idx = np.flatnonzero(fold_of != f)
        y_tr = y[train_idx]
        votes = np.zeros((len(test_idx), len(classes)), dtype=int)
        for ai in range(len(classes)):
            for bi in range(ai + 1, len(classes)):
                a, b = classes[ai], classes[bi]
                sel = np.flatnonzero((y_tr == a) | (y_tr == b))
                if len(sel) == 0 or (y_tr[sel] == a).all() or (y_tr[sel] == b).all():
                    continue
                rows = train_idx[sel]
                ypair = np.where(y_tr[sel] == a, 1.0, -1.0)
                alpha, bias, converged = _smo(K[np.ix_(rows, rows)], ypair, C)
                if not converged:
                    raise SvmConvergenceError(
                        f"SMO stalled in fold {f} on pair ({a}, {b})"
                    )
                keep = alpha > ALPHA_TOL
                dec = K[np.ix_(test_idx, rows[keep])] @ (alpha * ypair)[keep] + bias
                votes[dec >= 0.0, ai] += 1
                votes[dec < 0.0, bi] += 1
        pred = np.array([classes[k] for k in np.argmax(votes, axis=1)])
        miss += int((pred != y[test_idx]).sum())
    return miss / n

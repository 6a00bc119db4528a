"""Covariance eigendecomposition and Kaiser-criterion component selection.

The eigensolver is cyclic Jacobi on the full symmetric matrix: sweeps of
plane rotations until the off-diagonal Frobenius norm falls below
1e-10 * ||C||_F, capped at 100 sweeps. Accurate and bit-deterministic,
which the model-file round-trip contract relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InsufficientDataError, ShapeError, ValidationError
from .tensorio import FeatureMatrix

JACOBI_MAX_SWEEPS = 100
JACOBI_REL_TOL = 1e-10
KAISER_THRESHOLD = 1.0  # strict: retain eigenvalues > 1, no slack


@dataclass(frozen=True)
class PcaModel:
    """Top-k orthonormal eigenvectors (rows) of the training covariance."""

    d: int
    k: int
    components: np.ndarray  # k x d, rows orthonormal, descending eigenvalue
    eigenvalues: np.ndarray  # k, non-increasing

    def __post_init__(self):
        components = np.asarray(self.components, dtype=np.float64)
        eigenvalues = np.asarray(self.eigenvalues, dtype=np.float64)
        if components.shape != (self.k, self.d):
            raise ShapeError(
                f"components shape {components.shape}, expected ({self.k}, {self.d})"
            )
        if eigenvalues.shape != (self.k,):
            raise ShapeError("eigenvalues must be a k-vector")
        if not (1 <= self.k <= self.d):
            raise ValidationError(f"k={self.k} outside [1, {self.d}]")
        if np.any(np.diff(eigenvalues) > 0):
            raise ValidationError("eigenvalues must be non-increasing")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "eigenvalues", eigenvalues)


def covariance(m: FeatureMatrix) -> np.ndarray:
    """Sample covariance (n-1 normalization), symmetrized exactly.

    Means are re-subtracted even when the input is nominally centered.
    """
    if m.n < 2:
        raise InsufficientDataError(f"covariance needs n >= 2, got n={m.n}")
    centered = m.values - m.values.mean(axis=0)
    c = centered.T @ centered / (m.n - 1)
    return (c + c.T) / 2.0


def sym_eigen(c: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Returns (eigenvalues descending, eigenvectors as orthonormal rows).
    Sign convention: in each eigenvector the entry of largest absolute
    value is positive; among ties the lowest index wins.
    """
    c = np.asarray(c, dtype=np.float64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {c.shape}")
    d = c.shape[0]
    asym = np.abs(c - c.T).max() if d else 0.0
    if asym > 1e-9 * max(1.0, np.abs(c).max(initial=0.0)):
        raise ValidationError(f"matrix is asymmetric beyond tolerance (max |C-C'|={asym:g})")

    a = (c + c.T) / 2.0
    v = np.eye(d)
    fro = np.linalg.norm(a, "fro")
    off_tol = JACOBI_REL_TOL * fro

    def off_norm(mat: np.ndarray) -> float:
        off = mat - np.diag(np.diag(mat))
        return float(np.linalg.norm(off, "fro"))

    converged = d < 2 or off_norm(a) <= off_tol
    for _ in range(JACOBI_MAX_SWEEPS):
        if converged:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                cth = 1.0 / np.sqrt(1.0 + t * t)
                sth = t * cth
                # A <- J' A J restricted to rows/cols p,q, then exact zero at (p,q)
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = cth * ap - sth * aq
                a[:, q] = sth * ap + cth * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = cth * ap - sth * aq
                a[q, :] = sth * ap + cth * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = cth * vp - sth * vq
                v[:, q] = sth * vp + cth * vq
        converged = off_norm(a) <= off_tol
    if not converged:
        raise ConvergenceError(
            f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (d={d})"
        )

    eigenvalues = np.diag(a).copy()
    order = np.argsort(-eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    vectors = v.T[order].copy()
    for row in vectors:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return eigenvalues, vectors


def fit_pca(standardized_train: FeatureMatrix) -> PcaModel:
    """PCA on standardized training features with Kaiser selection.

    Retains components with eigenvalue strictly greater than 1; when none
    qualify, falls back to k=1 so downstream stages keep a feature space.
    """
    c = covariance(standardized_train)
    eigenvalues, vectors = sym_eigen(c)
    k = int(np.sum(eigenvalues > KAISER_THRESHOLD))
    if k == 0:
        k = 1
    return PcaModel(
        d=standardized_train.d,
        k=k,
        components=vectors[:k].copy(),
        eigenvalues=eigenvalues[:k].copy(),
    )


def project(p: PcaModel, m: FeatureMatrix) -> FeatureMatrix:
    if m.d != p.d:
        raise ShapeError(f"PCA model has d={p.d}, matrix has d={m.d}")
    return FeatureMatrix(values=m.values @ p.components.T, ids=m.ids)

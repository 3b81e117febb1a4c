"""Numerical primitives and domain types shared across the package.

Conventions used throughout:

* point sets are ``d x n`` arrays, one column per point;
* embeddings are ``p x n`` arrays, one column per point;
* kernels are plain symmetric ``n x n`` arrays;
* distance matrices are wrapped in :class:`DistanceMatrix` so that raw and
  squared distances cannot be confused.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidMatrix, ScaleMismatch, ShapeError

SYMMETRY_TOL = 1e-12


class Scale(enum.Enum):
    RAW = "raw"
    SQUARED = "squared"


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric non-negative ``n x n`` matrix with zero diagonal."""

    values: np.ndarray
    scale: Scale = Scale.RAW

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeError(f"distance matrix must be square, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InvalidMatrix("distance matrix has non-finite entries")
        if np.any(v < 0):
            raise InvalidMatrix("distance matrix has negative entries")
        if np.any(np.diag(v) != 0):
            raise InvalidMatrix("distance matrix diagonal must be exactly zero")
        scale = max(1.0, float(np.abs(v).max(initial=0.0)))
        if np.abs(v - v.T).max(initial=0.0) > SYMMETRY_TOL * scale:
            raise InvalidMatrix("distance matrix is not symmetric")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    def squared(self):
        if self.scale is Scale.SQUARED:
            return self
        return DistanceMatrix(self.values ** 2, Scale.SQUARED)

    def raw(self):
        if self.scale is Scale.RAW:
            return self
        return DistanceMatrix(np.sqrt(self.values), Scale.RAW)


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues sorted descending, eigenvectors as matching columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_data_matrix(X):
    """Validate and return a finite ``d x n`` float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ShapeError(f"data matrix must be d x n with d, n >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidMatrix("data matrix has non-finite entries")
    return X


def canonicalize_signs(V):
    """Flip columns so the entry of largest magnitude in each is positive."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eig(K):
    """Eigendecomposition of a symmetric matrix.

    The input is symmetrized as ``(K + K.T) / 2`` first. Eigenvalues are
    returned in descending order and eigenvector signs are canonicalized
    (see :func:`canonicalize_signs`) so results are deterministic.

    Returns
    -------
    EigenSystem
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ShapeError(f"kernel must be square, got {K.shape}")
    if not np.all(np.isfinite(K)):
        raise InvalidMatrix("kernel has non-finite entries")
    Ks = 0.5 * (K + K.T)
    w, V = np.linalg.eigh(Ks)
    order = np.argsort(w, kind="stable")[::-1]
    return EigenSystem(w[order], np.ascontiguousarray(canonicalize_signs(V[:, order])))


def pseudo_inverse(M, rcond=1e-12):
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values at or below ``rcond * sigma_max`` are treated as zero.
    """
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix("matrix has non-finite entries")
    return np.linalg.pinv(M, rcond=rcond)


def double_center(D):
    """Turn squared distances into a centered kernel, ``-1/2 H D H``.

    ``H`` is never formed; row, column and grand means are subtracted.
    """
    if not isinstance(D, DistanceMatrix):
        raise ScaleMismatch("double_center needs a DistanceMatrix tagged SQUARED")
    if D.scale is not Scale.SQUARED:
        raise ScaleMismatch("double_center needs squared distances; square first")
    K = center_matrix(-0.5 * D.values)
    return 0.5 * (K + K.T)


def center_matrix(M):
    """Subtract row means, column means and add back the grand mean."""
    M = np.asarray(M, dtype=float)
    row = M.mean(axis=1, keepdims=True)
    col = M.mean(axis=0, keepdims=True)
    return M - row - col + M.mean()


def clamp_eigenvalues(eigenvalues, p):
    """Clamp negative values among the leading ``p`` eigenvalues to zero.

    Returns the clamped leading eigenvalues and the number clamped.
    """
    top = np.array(eigenvalues[:p], dtype=float)
    neg = top < 0
    top[neg] = 0.0
    return top, int(neg.sum())

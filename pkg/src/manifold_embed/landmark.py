"""Nystrom approximation, landmark MDS and landmark Isomap."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import Scale, as_data_matrix, center_matrix, pseudo_inverse, sym_eig
from .distance import geodesic_distances, knn_graph, pairwise_euclidean, squared_cross_distances
from .errors import (
    InvalidDimension,
    InvalidM,
    NonEmbeddableDirection,
    ScaleMismatch,
    ShapeError,
    SingularLandmarkBlock,
)

log = logging.getLogger(__name__)

SINGULAR_COND = 1e12


@dataclass(frozen=True)
class NystromParts:
    """Landmark blocks of a kernel: ``A`` (m x m) and ``B`` (m x (n - m)).

    Columns of ``B`` follow the non-landmark indices in ascending order.
    """

    A: np.ndarray
    B: np.ndarray
    landmarks: np.ndarray
    n: int

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float).reshape(A.shape[0], -1)
        L = np.asarray(self.landmarks, dtype=int)
        m = A.shape[0]
        if A.shape != (m, m) or L.shape != (m,) or B.shape != (m, self.n - m):
            raise ShapeError(f"inconsistent parts: A {A.shape}, B {B.shape}, m={L.size}, n={self.n}")
        if np.any(np.diff(L) <= 0) or (m and (L[0] < 0 or L[-1] >= self.n)):
            raise ValueError("landmark indices must be distinct, sorted and in range")
        if np.abs(A - A.T).max(initial=0.0) > 1e-10 * max(1.0, np.abs(A).max(initial=0.0)):
            raise ValueError("landmark block A is not symmetric")
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "landmarks", L)

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def others(self):
        mask = np.ones(self.n, dtype=bool)
        mask[self.landmarks] = False
        return np.flatnonzero(mask)

    @classmethod
    def from_kernel(cls, K, landmarks):
        K = np.asarray(K, dtype=float)
        L = np.sort(np.asarray(landmarks, dtype=int))
        mask = np.ones(K.shape[0], dtype=bool)
        mask[L] = False
        O = np.flatnonzero(mask)
        return cls(K[np.ix_(L, L)], K[np.ix_(L, O)], L, K.shape[0])


def select_landmarks(n, m, seed=0):
    """``m`` distinct indices drawn uniformly from ``range(n)``, sorted.

    For a fixed seed, the selection for ``m`` is a subset of the one for
    ``m + 1``.
    """
    if not 1 <= m <= n:
        raise InvalidM(f"m must be in [1, {n}], got {m}")
    rng = np.random.default_rng(seed)
    return np.sort(rng.permutation(n)[:m])


def _landmark_inverse(A, allow_pinv):
    cond = np.linalg.cond(A) if A.size else 1.0
    if np.isfinite(cond) and cond < SINGULAR_COND:
        return np.linalg.inv(A)
    if not allow_pinv:
        raise SingularLandmarkBlock(f"landmark block is numerically singular (cond={cond:.3g})")
    log.warning("landmark block is numerically singular (cond=%.3g); using pseudo-inverse", cond)
    return pseudo_inverse(A, rcond=1e-10)


def nystrom_complete(parts, allow_pinv=True):
    """Full n x n kernel with the unknown block filled as ``B^T A^-1 B``."""
    L, O = parts.landmarks, parts.others
    Ainv = _landmark_inverse(parts.A, allow_pinv)
    C = parts.B.T @ Ainv @ parts.B
    K = np.empty((parts.n, parts.n))
    K[np.ix_(L, L)] = parts.A
    K[np.ix_(L, O)] = parts.B
    K[np.ix_(O, L)] = parts.B.T
    K[np.ix_(O, O)] = 0.5 * (C + C.T)
    return K


def landmark_embed(parts, p):
    """Embed landmarks as ``S^(1/2) U^T`` and the rest as ``S^(-1/2) U^T B``.

    ``A = U S U^T``; the result is p x n in original index order.
    """
    if not 1 <= p <= parts.m:
        raise InvalidDimension(f"p must be in [1, {parts.m}], got {p}")
    es = sym_eig(parts.A)
    sig = es.eigenvalues[:p]
    U = es.eigenvectors[:, :p]
    bad = np.flatnonzero(sig <= 0)
    if bad.size:
        raise NonEmbeddableDirection(
            f"landmark eigenvalue(s) {sig[bad].tolist()} at dimension(s) {bad.tolist()} not positive")
    Y = np.empty((p, parts.n))
    Y[:, parts.landmarks] = np.sqrt(sig)[:, None] * U.T
    Y[:, parts.others] = (U.T @ parts.B) / np.sqrt(sig)[:, None]
    return Y


def kernel_parts_from_distance_parts(E, F, scale=Scale.SQUARED):
    """Kernel blocks ``A``, ``B`` from squared-distance blocks ``E``, ``F``.

    Centering uses means over the landmarks only. Inputs must already be
    squared; nothing is squared here.
    """
    if scale is not Scale.SQUARED:
        raise ScaleMismatch("distance blocks must be squared")
    E = np.asarray(E, dtype=float)
    m = E.shape[0]
    if E.ndim != 2 or E.shape != (m, m):
        raise ShapeError(f"E must be square, got {E.shape}")
    F = np.asarray(F, dtype=float).reshape(m, -1)
    row_E = E.mean(axis=1, keepdims=True)
    A = center_matrix(-0.5 * E)
    B = -0.5 * (F - F.mean(axis=0, keepdims=True) - row_E)
    return 0.5 * (A + A.T), B


def _parts_from_rows(rows_sq, L):
    """Split landmark-to-all squared distances (m x n) into E and F."""
    n = rows_sq.shape[1]
    mask = np.ones(n, dtype=bool)
    mask[L] = False
    E = rows_sq[:, L]
    E = 0.5 * (E + E.T)
    np.fill_diagonal(E, 0.0)
    return E, rows_sq[:, mask]


def fit_landmark_mds(X, m, p, seed=0):
    """Landmark MDS: only the m x n landmark-to-all distances are computed."""
    X = as_data_matrix(X)
    L = select_landmarks(X.shape[1], m, seed)
    rows = squared_cross_distances(X[:, L], X)
    E, F = _parts_from_rows(rows, L)
    A, B = kernel_parts_from_distance_parts(E, F)
    return landmark_embed(NystromParts(A, B, L, X.shape[1]), p)


def fit_landmark_isomap(X, m, k, p, seed=0):
    """Landmark Isomap: m single-source shortest-path runs over the full kNN graph."""
    X = as_data_matrix(X)
    n = X.shape[1]
    L = select_landmarks(n, m, seed)
    G = knn_graph(pairwise_euclidean(X), k)
    rows = geodesic_distances(G, indices=L) ** 2
    E, F = _parts_from_rows(rows, L)
    A, B = kernel_parts_from_distance_parts(E, F)
    return landmark_embed(NystromParts(A, B, L, n), p)

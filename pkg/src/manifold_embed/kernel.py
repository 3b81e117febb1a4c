"""Kernel construction, the kernel Isomap correction and out-of-sample centering."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import DistanceMatrix, Scale, as_data_matrix, center_matrix, double_center
from .distance import geodesic_distances, knn_graph, pairwise_euclidean
from .errors import DegenerateInput, InvalidCorrection, InvalidK, NumericalFailure, ShapeError


class KernelKind(enum.Enum):
    LINEAR = "linear"
    COSINE = "cosine"
    RBF = "rbf"
    GEODESIC = "geodesic"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind = KernelKind.LINEAR
    bandwidth: float | None = None  # RBF only; None means median heuristic
    k: int | None = None  # GEODESIC only

    def __post_init__(self):
        if self.kind is KernelKind.RBF and self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError("RBF bandwidth must be positive")
        if self.kind is KernelKind.GEODESIC and (self.k is None or self.k < 1):
            raise InvalidK("GEODESIC kernel needs a positive k")

    @classmethod
    def parse(cls, name, bandwidth=None, k=None):
        return cls(KernelKind(name.lower()), bandwidth=bandwidth, k=k)


@dataclass(frozen=True)
class IsomapCorrection:
    c_star: float
    c_used: float

    def __post_init__(self):
        if self.c_used < self.c_star:
            raise InvalidCorrection(f"c_used={self.c_used} is below c*={self.c_star}")


def median_bandwidth(X):
    """Median of the pairwise raw distances (off-diagonal)."""
    D = pairwise_euclidean(X).values
    iu = np.triu_indices(D.shape[0], k=1)
    if len(iu[0]) == 0:
        return 1.0
    med = float(np.median(D[iu]))
    return med if med > 0 else 1.0


def raw_kernel(X, Xt, spec, bandwidth=None):
    """Uncentered kernel between columns of ``X`` (n) and ``Xt`` (n_t).

    Not defined for GEODESIC, which is built from a graph over ``X``.
    """
    X = as_data_matrix(X)
    Xt = as_data_matrix(Xt)
    if spec.kind is KernelKind.LINEAR:
        return X.T @ Xt
    if spec.kind is KernelKind.COSINE:
        nx = np.linalg.norm(X, axis=0)
        nt = np.linalg.norm(Xt, axis=0)
        zero = np.flatnonzero(nx == 0).tolist() + np.flatnonzero(nt == 0).tolist()
        if zero:
            raise DegenerateInput(f"zero-norm column(s) under cosine kernel: {sorted(set(zero))}")
        return (X / nx).T @ (Xt / nt)
    if spec.kind is KernelKind.RBF:
        sigma = bandwidth if bandwidth is not None else spec.bandwidth
        if sigma is None:
            raise ValueError("RBF bandwidth not resolved")
        from .distance import squared_cross_distances
        return np.exp(-squared_cross_distances(X, Xt) / (2.0 * sigma ** 2))
    raise ValueError(f"no pointwise kernel for {spec.kind}")


def build_kernel(X, spec):
    """Kernel matrix of the columns of ``X``.

    LINEAR is the Gram matrix of the centered data. COSINE and RBF are the
    raw (uncentered) kernels. GEODESIC is ``-1/2 H (D_g)^2 H`` where ``D_g``
    holds graph shortest-path distances over the kNN graph.
    """
    X = as_data_matrix(X)
    if spec.kind is KernelKind.LINEAR:
        Xc = X - X.mean(axis=1, keepdims=True)
        K = Xc.T @ Xc
    elif spec.kind is KernelKind.GEODESIC:
        Dg = geodesic_distances(knn_graph(pairwise_euclidean(X), spec.k))
        K = double_center(Dg.squared())
    else:
        sigma = spec.bandwidth
        if spec.kind is KernelKind.RBF and sigma is None:
            sigma = median_bandwidth(X)
        K = raw_kernel(X, X, spec, bandwidth=sigma)
        if spec.kind is KernelKind.RBF:
            np.fill_diagonal(K, 1.0)
    return 0.5 * (K + K.T)


def distance_kernels(Dg):
    """``K(D^2)`` and ``K(D)`` for a raw distance matrix, both double-centered."""
    if not isinstance(Dg, DistanceMatrix) or Dg.scale is not Scale.RAW:
        raise ValueError("distance_kernels needs a RAW DistanceMatrix")
    K_D2 = double_center(Dg.squared())
    # K(D) centers the raw distances with the same -1/2 H . H operator
    K_D = double_center(DistanceMatrix(Dg.values, Scale.SQUARED))
    return K_D2, K_D


def kernel_isomap_cstar(K_D2, K_D, rel_margin=1e-6):
    """Smallest additive constant making the corrected kernel PSD.

    ``c_star`` is the largest real part among the eigenvalues of the
    non-symmetric block matrix ``[[0, 2 K(D^2)], [-I, -4 K(D)]]``.

    Both kernels annihilate the constant vector, which contributes an exact
    (defective) double eigenvalue at zero. A general eigensolver smears it
    to roughly +-sqrt(eps), so that direction is projected out and zero is
    added back analytically.
    """
    K_D2 = np.asarray(K_D2, dtype=float)
    K_D = np.asarray(K_D, dtype=float)
    if K_D2.shape != K_D.shape or K_D2.ndim != 2 or K_D2.shape[0] != K_D2.shape[1]:
        raise ShapeError("K(D^2) and K(D) must be square and of equal shape")
    n = K_D2.shape[0]
    if n < 2:
        return IsomapCorrection(0.0, 0.0)
    # orthonormal basis of the complement of the constant vector
    Q = np.linalg.qr(np.column_stack([np.ones(n), np.eye(n)[:, :n - 1]]))[0][:, 1:]
    A2 = Q.T @ K_D2 @ Q
    A1 = Q.T @ K_D @ Q
    r = n - 1
    block = np.block([
        [np.zeros((r, r)), 2.0 * A2],
        [-np.eye(r), -4.0 * A1],
    ])
    try:
        ev = np.linalg.eigvals(block)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue routine failed: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise NumericalFailure("non-finite eigenvalues in c* problem")
    c_star = max(0.0, float(np.max(ev.real)))
    return IsomapCorrection(c_star, c_star + rel_margin * abs(c_star))


def kernel_isomap_correct(K_D2, K_D, corr):
    """``K' = K(D^2) + 2c K(D) + c^2/2 H`` with ``c = corr.c_used``."""
    if corr.c_used < corr.c_star:
        raise InvalidCorrection(f"c_used={corr.c_used} is below c*={corr.c_star}")
    K_D2 = np.asarray(K_D2, dtype=float)
    n = K_D2.shape[0]
    c = corr.c_used
    H = np.eye(n) - 1.0 / n
    K = K_D2 + 2.0 * c * np.asarray(K_D, dtype=float) + 0.5 * c * c * H
    return 0.5 * (K + K.T)


def center_oos_kernel(K, K_t):
    """Center a train-vs-test kernel consistently with the training kernel.

    ``K`` is the uncentered n x n training kernel, ``K_t`` the uncentered
    n x n_t kernel between training and test points.
    """
    K = np.asarray(K, dtype=float)
    K_t = np.asarray(K_t, dtype=float)
    if K_t.ndim == 1:
        K_t = K_t[:, None]
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K_t.shape[0] != K.shape[0]:
        raise ShapeError(f"shapes {K.shape} and {K_t.shape} do not conform")
    col_means = K_t.mean(axis=0, keepdims=True)
    row_means = K.mean(axis=1, keepdims=True)
    return K_t - col_means - row_means + K.mean()


def centered_kernel(K):
    """Double-center an arbitrary kernel matrix."""
    Kc = center_matrix(K)
    return 0.5 * (Kc + Kc.T)

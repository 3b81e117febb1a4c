"""Out-of-sample embedding.

Two families are provided:

* the eigenfunction route for spectral models (classical/kernel MDS,
  Isomap, kernel Isomap), plus the equivalent landmark-Isomap formula;
* the kernel-mapping route, which fits normalized-kernel regression
  coefficients to any existing embedding, spectral or iterative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import as_data_matrix, pseudo_inverse
from .distance import geodesic_distances, knn_graph, pairwise_euclidean, squared_cross_distances
from .errors import DegenerateInput, NonEmbeddableDirection, ShapeError
from .spectral import Method, centered_oos_kernel

log = logging.getLogger(__name__)


def _top_eigen(model):
    delta = model.eigenvalues[:model.p]
    bad = np.flatnonzero(delta <= 0)
    if bad.size:
        raise NonEmbeddableDirection(
            f"eigenvalue(s) {delta[bad].tolist()} at dimension(s) {bad.tolist()} are not positive")
    return delta, model.eigenvectors[:, :model.p]


def oos_geodesics(model, X_t, test_as_intermediate=False):
    """Geodesic distances (n x n_t) from training points to test points.

    By default only training points serve as intermediate nodes: a test
    point enters the graph through its ``k`` nearest training points and
    the rest of the path uses the stored training geodesics. With
    ``test_as_intermediate`` the kNN graph is rebuilt over training and
    test points together and shortest paths may pass through test points.
    """
    X_t = as_data_matrix(X_t)
    X = model.X
    if X_t.shape[0] != X.shape[0]:
        raise ShapeError(f"test points have {X_t.shape[0]} features, model has {X.shape[0]}")
    n, k = X.shape[1], model.k
    if test_as_intermediate:
        Z = np.hstack([X, X_t])
        G = knn_graph(pairwise_euclidean(Z), k)
        D = geodesic_distances(G).values
        return D[:n, n:]
    E = np.sqrt(squared_cross_distances(X_t, X))  # n_t x n
    nbrs = knn_indices_rect(E, k)
    e = np.take_along_axis(E, nbrs, axis=1)
    Dg = model.geodesic
    out = np.empty((n, X_t.shape[1]))
    for t in range(X_t.shape[1]):
        out[:, t] = np.min(e[t][:, None] + Dg[nbrs[t]], axis=0)
    return out


def knn_indices_rect(E, k):
    """``k`` smallest entries per row of a rectangular distance matrix, ties by index."""
    return np.argsort(E, axis=1, kind="stable")[:, :k]


def oos_embed_eigen(model, X_t, test_as_intermediate=False):
    """Eigenfunction embedding of new points: ``y_k = v_k^T k_t / sqrt(delta_k)``.

    ``k_t`` is the train-vs-test kernel centered consistently with the
    training kernel. Returns a p x n_t array.
    """
    delta, V = _top_eigen(model)
    X_t = as_data_matrix(X_t)
    if test_as_intermediate:
        # test points share one graph, so the batch is not separable
        Kt = centered_oos_kernel(model, X_t, test_as_intermediate=True)
        return (V.T @ Kt) / np.sqrt(delta)[:, None]
    # column by column, so a batch equals the concatenation of single-point calls
    out = np.empty((model.p, X_t.shape[1]))
    for j in range(X_t.shape[1]):
        kt = centered_oos_kernel(model, np.ascontiguousarray(X_t[:, j:j + 1]))[:, 0]
        out[:, j] = (V.T @ kt) / np.sqrt(delta)
    return out


def oos_embed_isomap_landmark_formula(model, X_t, test_as_intermediate=False):
    """Landmark-Isomap formula for new points.

    ``y_k(x) = 1/(2 sqrt(delta_k)) sum_i v_ki (mean_j Dg_ij^2 - Dt_i(x)^2)``,
    with squared geodesics throughout.
    """
    if model.method is not Method.ISOMAP:
        raise ValueError("landmark formula applies to Isomap models only")
    delta, V = _top_eigen(model)
    Dt = oos_geodesics(model, X_t, test_as_intermediate=test_as_intermediate)
    avg = (model.geodesic ** 2).mean(axis=1, keepdims=True)
    return (V.T @ (avg - Dt ** 2)) / (2.0 * np.sqrt(delta)[:, None])


@dataclass(frozen=True)
class KernelMap:
    """Fitted normalized-kernel regression ``y(x) = sum_j alpha_j k''(x, x_j)``.

    ``A`` is n x p (row j is ``alpha_j``), ``sigmas`` the per-training-point
    Gaussian bandwidths.
    """

    A: np.ndarray
    sigmas: np.ndarray
    gamma: float
    X: np.ndarray
    Y: np.ndarray
    condition: float

    @property
    def p(self):
        return self.A.shape[1]


def normalized_kernel(X_query, X, sigmas):
    """Row-normalized Gaussian kernel, rows index query points.

    Returns ``(K'', zero_rows)`` where ``zero_rows`` marks queries whose
    kernel values all underflowed; those rows are left as zeros.
    """
    sq = squared_cross_distances(X_query, X)
    K = np.exp(-sq / (2.0 * sigmas[None, :] ** 2))
    s = K.sum(axis=1)
    zero = s == 0
    s[zero] = 1.0
    return K / s[:, None], zero


def kernel_map_fit(X, Y, gamma=0.5):
    """Least-squares fit of ``Y^T = K'' A`` with ``A = pinv(K'') Y^T``."""
    X = as_data_matrix(X)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    n = X.shape[1]
    if Y.shape[1] != n:
        raise ShapeError(f"embedding has {Y.shape[1]} points, data has {n}")
    if n < 2:
        raise DegenerateInput("kernel mapping needs at least 2 training points")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    D = pairwise_euclidean(X).values
    np.fill_diagonal(D, np.inf)
    nn = D.min(axis=1)
    dup = np.flatnonzero(nn == 0)
    if dup.size:
        j = int(dup[0])
        i = int(np.flatnonzero(D[j] == 0)[0])
        raise DegenerateInput(f"duplicate training points give zero bandwidth, e.g. {(i, j)}",
                              pairs=[(i, j)])
    sigmas = gamma * nn
    Kpp, _ = normalized_kernel(X, X, sigmas)
    A = pseudo_inverse(Kpp) @ Y.T
    return KernelMap(A, sigmas, float(gamma), X, Y, float(np.linalg.cond(Kpp)))


def kernel_map_apply(kmap, X_t):
    """Embed new points as ``Y_t = (K''_t A)^T``, a p x n_t array."""
    X_t = as_data_matrix(X_t)
    if X_t.shape[0] != kmap.X.shape[0]:
        raise ShapeError(f"test points have {X_t.shape[0]} features, map has {kmap.X.shape[0]}")
    Kt, zero = normalized_kernel(X_t, kmap.X, kmap.sigmas)
    Yt = (Kt @ kmap.A).T
    if zero.any():
        idx = np.flatnonzero(zero)
        log.warning("kernel underflow for %d test point(s); using nearest training embedding",
                    idx.size)
        sq = squared_cross_distances(X_t[:, idx], kmap.X)
        nearest = np.argmin(sq, axis=1)
        Yt[:, idx] = kmap.Y[:, nearest]
    return Yt

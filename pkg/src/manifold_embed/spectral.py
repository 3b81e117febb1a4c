"""Closed-form spectral embeddings: classical MDS, kernel MDS, Isomap, kernel Isomap.

Every method here reduces to the same last step: eigendecompose a centered
kernel ``K = V diag(delta) V^T`` and take ``Y = diag(delta)^(1/2) V^T``
truncated to the leading ``p`` rows.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from .core import as_data_matrix, clamp_eigenvalues, sym_eig
from .distance import NeighborGraph, geodesic_distances, knn_graph, pairwise_euclidean
from .errors import DegenerateInput, InvalidDimension
from .kernel import (
    KernelKind,
    KernelSpec,
    build_kernel,
    center_oos_kernel,
    centered_kernel,
    distance_kernels,
    kernel_isomap_correct,
    kernel_isomap_cstar,
    median_bandwidth,
    raw_kernel,
)

log = logging.getLogger(__name__)


class Method(enum.Enum):
    CLASSICAL_MDS = "cmds"
    KERNEL_MDS = "kmds"
    ISOMAP = "isomap"
    KERNEL_ISOMAP = "kisomap"


@dataclass(frozen=True)
class SpectralModel:
    """Everything needed to reproduce a spectral fit and embed new points.

    ``train_kernel`` is the *uncentered* training kernel; out-of-sample
    centering needs it in that form. For the geodesic methods it is
    ``-1/2`` times the (shifted) squared geodesic distances.
    """

    method: Method
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    train_kernel: np.ndarray
    X: np.ndarray
    p: int
    clamped_count: int = 0
    kernel: KernelSpec | None = None
    bandwidth: float | None = None
    k: int | None = None
    c_used: float | None = None
    c_star: float | None = None
    geodesic: np.ndarray | None = None
    graph: NeighborGraph | None = field(default=None, repr=False, compare=False)

    @property
    def n(self):
        return self.X.shape[1]

    def embedding(self):
        top, _ = clamp_eigenvalues(self.eigenvalues, self.p)
        return np.sqrt(top)[:, None] * self.eigenvectors[:, :self.p].T


def embed_kernel(K, p):
    """Spectral embedding of a centered kernel.

    Returns ``(eigen_system, Y, clamped_count)`` with ``Y`` of shape p x n.
    Negative eigenvalues among the leading ``p`` are clamped to zero.
    """
    n = K.shape[0]
    if not 1 <= p <= n:
        raise InvalidDimension(f"p must be in [1, {n}], got {p}")
    es = sym_eig(K)
    top, clamped = clamp_eigenvalues(es.eigenvalues, p)
    if clamped:
        log.warning("clamped %d negative eigenvalue(s) among the top %d", clamped, p)
    Y = np.sqrt(top)[:, None] * es.eigenvectors[:, :p].T
    return es, Y, clamped


def _check_p(p, n):
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= n:
        raise InvalidDimension(f"p must be an integer in [1, {n}], got {p}")


def fit_classical_mds(X, p):
    """Classical MDS (principal coordinates) on the columns of ``X``."""
    X = as_data_matrix(X)
    _check_p(p, X.shape[1])
    K = build_kernel(X, KernelSpec(KernelKind.LINEAR))
    es, Y, clamped = embed_kernel(K, p)
    model = SpectralModel(Method.CLASSICAL_MDS, es.eigenvalues, es.eigenvectors,
                          X.T @ X, X, int(p), clamped,
                          kernel=KernelSpec(KernelKind.LINEAR))
    return model, Y


def fit_kernel_mds(X, spec, p):
    """Generalized classical MDS with an arbitrary pointwise kernel.

    A LINEAR spec gives exactly :func:`fit_classical_mds`. GEODESIC specs
    are routed to :func:`fit_isomap`.
    """
    X = as_data_matrix(X)
    _check_p(p, X.shape[1])
    if spec.kind is KernelKind.LINEAR:
        return fit_classical_mds(X, p)
    if spec.kind is KernelKind.GEODESIC:
        return fit_isomap(X, spec.k, p)
    bandwidth = spec.bandwidth
    if spec.kind is KernelKind.RBF and bandwidth is None:
        bandwidth = median_bandwidth(X)
    K_raw = build_kernel(X, KernelSpec(spec.kind, bandwidth=bandwidth))
    es, Y, clamped = embed_kernel(centered_kernel(K_raw), p)
    model = SpectralModel(Method.KERNEL_MDS, es.eigenvalues, es.eigenvectors,
                          K_raw, X, int(p), clamped, kernel=spec, bandwidth=bandwidth)
    return model, Y


def _geodesics(X, k):
    G = knn_graph(pairwise_euclidean(X), k)
    return G, geodesic_distances(G)


def fit_isomap(X, k, p):
    """Isomap: classical MDS on squared kNN-graph geodesic distances."""
    X = as_data_matrix(X)
    n = X.shape[1]
    if n < 3:
        raise DegenerateInput("Isomap needs at least 3 training points")
    _check_p(p, n)
    G, Dg = _geodesics(X, k)
    raw = -0.5 * Dg.values ** 2
    es, Y, clamped = embed_kernel(centered_kernel(raw), p)
    model = SpectralModel(Method.ISOMAP, es.eigenvalues, es.eigenvectors, raw, X,
                          int(p), clamped, k=int(k), geodesic=Dg.values, graph=G)
    return model, Y


def shifted_geodesics(Dg, c):
    """Add ``c`` to every off-diagonal (nonzero-pair) distance."""
    Dg = np.asarray(Dg, dtype=float)
    out = Dg + c
    np.fill_diagonal(out, 0.0)
    return out


def fit_kernel_isomap(X, k, p, c=None):
    """Kernel Isomap: geodesic kernel shifted to be positive semi-definite.

    ``c`` overrides the additive constant (bypassing the ``c >= c*``
    check); it exists for tests that need ``c = 0``.
    """
    X = as_data_matrix(X)
    n = X.shape[1]
    if n < 2:
        raise DegenerateInput("kernel Isomap needs at least 2 training points")
    _check_p(p, n)
    G, Dg = _geodesics(X, k)
    K_D2, K_D = distance_kernels(Dg)
    corr = kernel_isomap_cstar(K_D2, K_D)
    if c is None:
        c_used = corr.c_used
        K = kernel_isomap_correct(K_D2, K_D, corr)
    else:
        c_used = float(c)
        H = np.eye(n) - 1.0 / n
        K = K_D2 + 2.0 * c_used * K_D + 0.5 * c_used ** 2 * H
        K = 0.5 * (K + K.T)
    es, Y, clamped = embed_kernel(K, p)
    raw = -0.5 * shifted_geodesics(Dg.values, c_used) ** 2
    model = SpectralModel(Method.KERNEL_ISOMAP, es.eigenvalues, es.eigenvectors, raw, X,
                          int(p), clamped, k=int(k), c_used=c_used, c_star=corr.c_star,
                          geodesic=Dg.values, graph=G)
    return model, Y


def fit_pca(X, p):
    """PCA scores (p x n) of the columns of ``X`` via SVD of the centered data.

    Row signs follow the same convention as :func:`core.canonicalize_signs`
    applied to the right singular vectors, so the output is comparable
    with classical MDS coordinates.
    """
    X = as_data_matrix(X)
    d, n = X.shape
    if not isinstance(p, (int, np.integer)) or not 1 <= p <= min(d, n):
        raise InvalidDimension(f"p must be in [1, {min(d, n)}], got {p}")
    Xc = X - X.mean(axis=1, keepdims=True)
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    scores = s[:p, None] * Vt[:p]
    idx = np.argmax(np.abs(Vt[:p]), axis=1)
    signs = np.sign(Vt[np.arange(p), idx])
    signs[signs == 0] = 1.0
    return scores * signs[:, None]


def oos_kernel(model, X_t, test_as_intermediate=False):
    """Uncentered train-vs-test kernel (n x n_t) matching the model's method."""
    from .oos import oos_geodesics
    X_t = as_data_matrix(X_t)
    if model.method is Method.CLASSICAL_MDS:
        return model.X.T @ X_t
    if model.method is Method.KERNEL_MDS:
        return raw_kernel(model.X, X_t, model.kernel, bandwidth=model.bandwidth)
    Dt = oos_geodesics(model, X_t, test_as_intermediate=test_as_intermediate)
    if model.method is Method.KERNEL_ISOMAP:
        Dt = np.where(Dt > 0, Dt + model.c_used, 0.0)
    return -0.5 * Dt ** 2


def centered_oos_kernel(model, X_t, **kw):
    return center_oos_kernel(model.train_kernel, oos_kernel(model, X_t, **kw))

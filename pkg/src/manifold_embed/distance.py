"""Euclidean distances, kNN graphs and graph (geodesic) distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, dijkstra

from .core import DistanceMatrix, Scale, as_data_matrix
from .errors import Disconnected, InvalidK, ScaleMismatch


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected weighted graph stored as a symmetric CSR matrix.

    Edge weights are raw Euclidean distances. Zero-weight edges (between
    duplicate points) are kept as explicit entries, so ``weights.nnz``
    counts every directed arc.
    """

    n: int
    weights: sp.csr_matrix

    def neighbors(self, i):
        row = self.weights[i]
        return list(zip(row.indices.tolist(), row.data.tolist()))

    @property
    def adjacency(self):
        return [self.neighbors(i) for i in range(self.n)]

    def degrees(self):
        return np.diff(self.weights.indptr)


def pairwise_euclidean(X, scale=Scale.RAW):
    """All pairwise distances between the columns of ``X``.

    Only the upper triangle is computed; the lower triangle is its mirror,
    so the result is exactly symmetric.
    """
    X = as_data_matrix(X)
    sq = squared_cross_distances(X, X)
    iu = np.triu_indices(X.shape[1], k=1)
    D = np.zeros_like(sq)
    D[iu] = sq[iu]
    D = D + D.T
    if scale is Scale.RAW:
        D = np.sqrt(D)
    return DistanceMatrix(D, scale)


def squared_cross_distances(A, B):
    """Squared distances between columns of ``A`` (d x n) and ``B`` (d x m)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    # difference-based form is exact for coincident points, unlike the
    # |a|^2 + |b|^2 - 2ab expansion
    out = np.empty((A.shape[1], B.shape[1]))
    for i in range(A.shape[1]):
        diff = B - A[:, i:i + 1]
        out[i] = np.einsum("ij,ij->j", diff, diff)
    return out


def knn_indices(D, k):
    """Indices of the ``k`` nearest other points for every row of ``D``.

    Ties are broken by ascending index (stable sort).
    """
    n = D.shape[0]
    masked = np.array(D, dtype=float, copy=True)
    np.fill_diagonal(masked, np.inf)
    order = np.argsort(masked, axis=1, kind="stable")
    return order[:, :k]


def knn_graph(D, k):
    """Symmetrized k-nearest-neighbour graph built from raw distances."""
    if not isinstance(D, DistanceMatrix) or D.scale is not Scale.RAW:
        raise ScaleMismatch("knn_graph needs a RAW DistanceMatrix")
    n = D.n
    if not isinstance(k, (int, np.integer)) or k < 1 or k > n - 1:
        raise InvalidK(f"k must be in [1, {n - 1}], got {k}")
    nbrs = knn_indices(D.values, int(k))
    rows = np.repeat(np.arange(n), k)
    cols = nbrs.ravel()
    # union symmetrization: keep (i, j) whenever either endpoint picked the other
    pairs = np.unique(np.concatenate([
        np.stack([rows, cols], axis=1),
        np.stack([cols, rows], axis=1),
    ]), axis=0)
    r, c = pairs[:, 0], pairs[:, 1]
    W = sp.csr_matrix((D.values[r, c], (r, c)), shape=(n, n))
    W.sort_indices()
    return NeighborGraph(n, W)


def check_connected(G):
    n_comp, labels = connected_components(G.weights, directed=False)
    if n_comp > 1:
        sizes = sorted(np.bincount(labels).tolist(), reverse=True)
        shown = ", ".join(map(str, sizes[:5])) + (", ..." if n_comp > 5 else "")
        raise Disconnected(
            f"neighbourhood graph has {n_comp} components (largest sizes {shown}); "
            "increase k or restrict to the largest component",
            labels,
        )


def geodesic_distances(G, indices=None):
    """Shortest-path lengths over the graph, Dijkstra from every source.

    ``indices`` restricts the sources (rows of the result); landmark
    methods use this to avoid the all-pairs computation.
    """
    check_connected(G)
    if indices is None:
        Dg = dijkstra(G.weights, directed=False)
        Dg = np.minimum(Dg, Dg.T)
        np.fill_diagonal(Dg, 0.0)
        return DistanceMatrix(Dg, Scale.RAW)
    rows = dijkstra(G.weights, directed=False, indices=np.asarray(indices))
    return np.atleast_2d(rows)


def floyd_warshall(G):
    """All-pairs shortest paths in O(n^3); reference implementation."""
    n = G.n
    W = np.full((n, n), np.inf)
    coo = G.weights.tocoo()
    W[coo.row, coo.col] = coo.data
    np.fill_diagonal(W, 0.0)
    for m in range(n):
        W = np.minimum(W, W[:, m:m + 1] + W[m:m + 1, :])
    return W


def largest_component(G):
    """Indices of the nodes in the largest connected component."""
    _, labels = connected_components(G.weights, directed=False)
    biggest = np.argmax(np.bincount(labels))
    return np.flatnonzero(labels == biggest)

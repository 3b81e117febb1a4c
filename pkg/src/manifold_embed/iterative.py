"""Stress-based iterative embeddings: metric MDS, Sammon mapping, non-metric MDS.

All three share one engine for weighted stress

    c(Y) = 1/a * sum_{i<j} W_ij (t_ij - d_ij(Y))^2

where ``t`` are target distances, ``d`` embedded Euclidean distances,
``W`` pair weights and ``a`` a normalizer. Sammon uses ``W = 1/t`` and
``a = sum t``; metric MDS uses ``W = 1`` and ``a = 1``; non-metric MDS
uses monotone-regression targets.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import isotonic_regression as _scipy_isotonic

from .core import DistanceMatrix, Scale, as_data_matrix, double_center
from .distance import knn_indices, pairwise_euclidean
from .errors import DegenerateInput, InvalidK, ShapeError

log = logging.getLogger(__name__)

DY_FLOOR = 1e-12


class Optimizer(enum.Enum):
    GRADIENT_DESCENT = "gd"
    DIAGONAL_QUASI_NEWTON = "qn"


@dataclass(frozen=True)
class IterConfig:
    max_iters: int = 500
    learning_rate: float = 0.3
    optimizer: Optimizer = Optimizer.DIAGONAL_QUASI_NEWTON
    tolerance: float = 1e-7
    seed: int = 0
    neighbors: int | None = None
    max_halvings: int = 20

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class StressReport:
    stresses: list = field(default_factory=list)
    step_scales: list = field(default_factory=list)
    halvings: int = 0

    @property
    def final_stress(self):
        return self.stresses[-1] if self.stresses else float("nan")

    @property
    def iterations(self):
        return len(self.stresses) - 1

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "stress", "step_scale"])
        for i, (s, sc) in enumerate(zip(self.stresses, self.step_scales)):
            w.writerow([i, repr(float(s)), repr(float(sc))])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# weighted stress engine


def _raw_distances(D_x):
    if isinstance(D_x, DistanceMatrix):
        return D_x.raw().values
    D = np.asarray(D_x, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ShapeError(f"distance matrix must be square, got {D.shape}")
    return D


def _embedded(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[None, :]
    return Y


def _check_shapes(T, Y):
    if Y.shape[1] != T.shape[0]:
        raise ShapeError(f"embedding has {Y.shape[1]} points, distances have {T.shape[0]}")


def embedded_distances(Y):
    Y = _embedded(Y)
    sq = np.zeros((Y.shape[1], Y.shape[1]))
    for row in Y:
        diff = row[:, None] - row[None, :]
        sq += diff * diff
    return np.sqrt(sq)


def pair_counts(D, neighbors=None):
    """Pair multiplicities: all pairs once, or kNN arcs counted per direction."""
    n = D.shape[0]
    if neighbors is None:
        C = np.ones((n, n))
    else:
        if not 1 <= neighbors <= n - 1:
            raise InvalidK(f"neighbors must be in [1, {n - 1}], got {neighbors}")
        M = np.zeros((n, n))
        M[np.repeat(np.arange(n), neighbors), knn_indices(D, neighbors).ravel()] = 1.0
        C = M + M.T
    np.fill_diagonal(C, 0.0)
    return C


def _stress_terms(T, W, a, Y, order=2):
    """Cost, gradient and diagonal second derivative of weighted stress."""
    Y = _embedded(Y)
    d = embedded_distances(Y)
    resid = T - d
    cost = 0.5 * np.sum(W * resid ** 2) / a
    if order == 0:
        return cost, None, None
    dfl = np.maximum(d, DY_FLOOR)
    F = W * resid / dfl
    np.fill_diagonal(F, 0.0)
    Fsum = F.sum(axis=1)
    grad = (-2.0 / a) * (Fsum[None, :] * Y - Y @ F.T)
    if order == 1:
        return cost, grad, None
    G = W * T / dfl ** 3
    np.fill_diagonal(G, 0.0)
    Gsum = G.sum(axis=1)
    quad = Y ** 2 * Gsum[None, :] - 2.0 * Y * (Y @ G.T) + (Y ** 2) @ G.T
    hess = (-2.0 / a) * (Fsum[None, :] - quad)
    return cost, grad, hess


def _sammon_weights(D, neighbors=None):
    C = pair_counts(D, neighbors)
    mask = C > 0
    zero = mask & (D == 0)
    if zero.any():
        i, j = np.nonzero(np.triu(zero))
        pairs = list(zip(i.tolist(), j.tolist()))
        raise DegenerateInput(f"coincident input points: {pairs[:10]}", pairs=pairs)
    W = np.zeros_like(D)
    W[mask] = C[mask] / D[mask]
    a = 0.5 * np.sum(C * D)
    return W, a


def metric_stress(D_x, Y, normalized=True):
    """Metric MDS stress over pairs ``j < i``; normalized by ``sum d_x^2`` if asked."""
    T = _raw_distances(D_x)
    Y = _embedded(Y)
    _check_shapes(T, Y)
    iu = np.triu_indices(T.shape[0], k=1)
    dx = T[iu]
    dy = embedded_distances(Y)[iu]
    num = np.sum((dx - dy) ** 2)
    if not normalized:
        return float(np.sqrt(num))
    den = np.sum(dx ** 2)
    if den == 0:
        raise DegenerateInput("all input distances are zero")
    return float(np.sqrt(num / den))


def sammon_cost(D_x, Y, neighbors=None):
    T = _raw_distances(D_x)
    Y = _embedded(Y)
    _check_shapes(T, Y)
    W, a = _sammon_weights(T, neighbors)
    return float(_stress_terms(T, W, a, Y, order=0)[0])


def sammon_gradient(D_x, Y, neighbors=None):
    """Gradient of the Sammon cost, a p x n array.

    Entry (k, i) sums over every partner ``j`` of point ``i``.
    """
    T = _raw_distances(D_x)
    Y = _embedded(Y)
    _check_shapes(T, Y)
    W, a = _sammon_weights(T, neighbors)
    return _stress_terms(T, W, a, Y, order=1)[1]


def sammon_hessian_diag(D_x, Y, neighbors=None):
    """Diagonal second derivatives of the Sammon cost, a p x n array."""
    T = _raw_distances(D_x)
    Y = _embedded(Y)
    _check_shapes(T, Y)
    W, a = _sammon_weights(T, neighbors)
    return _stress_terms(T, W, a, Y, order=2)[2]


# ---------------------------------------------------------------------------
# monotone regression for non-metric MDS


def isotonic_regression(y, w=None):
    """Least-squares non-decreasing fit to ``y`` (pool-adjacent-violators)."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        return y.copy()
    return _scipy_isotonic(y, weights=w, increasing=True).x


def disparities(T, d):
    """Monotone targets for the embedded distances ``d`` (condensed vectors).

    Pairs are ordered by input distance; ties in the input are ordered by
    embedded distance so that tied dissimilarities never force a violation.
    """
    order = np.lexsort((d, T))
    dhat = np.empty_like(d)
    dhat[order] = isotonic_regression(d[order])
    return dhat


def nonmetric_stress(D_x, Y):
    """Kruskal Stress-1: ``sqrt(sum (d - dhat)^2 / sum d^2)`` over pairs ``j < i``."""
    T = _raw_distances(D_x)
    Y = _embedded(Y)
    _check_shapes(T, Y)
    iu = np.triu_indices(T.shape[0], k=1)
    d = embedded_distances(Y)[iu]
    den = np.sum(d ** 2)
    if den == 0:
        raise DegenerateInput("all embedded points coincide")
    dhat = disparities(T[iu], d)
    return float(np.sqrt(np.sum((d - dhat) ** 2) / den))


def _nonmetric_direction(T, Y, cfg):
    n = T.shape[0]
    iu = np.triu_indices(n, k=1)
    dfull = embedded_distances(Y)
    d = dfull[iu]
    dhat_c = disparities(T[iu], d)
    Dhat = np.zeros_like(T)
    Dhat[iu] = dhat_c
    Dhat = Dhat + Dhat.T
    W = np.ones_like(T)
    np.fill_diagonal(W, 0.0)
    N, gN, hN = _stress_terms(Dhat, W, 1.0, Y)
    Tsum = np.sum(d ** 2)
    gT = 2.0 * (n * Y - Y.sum(axis=1, keepdims=True))
    grad = gN / Tsum - N * gT / Tsum ** 2
    if cfg.optimizer is Optimizer.GRADIENT_DESCENT:
        return -cfg.learning_rate * grad
    return -cfg.learning_rate * grad / _floored_abs(hN / Tsum)


# ---------------------------------------------------------------------------
# solvers


def _floored_abs(h):
    h = np.abs(h)
    floor = max(1e-12 * float(h.max(initial=0.0)), 1e-300)
    return np.maximum(h, floor)


def classical_init(T, p, seed=0):
    """Classical MDS coordinates for raw distances ``T``; seeded random fallback."""
    from .spectral import embed_kernel
    try:
        K = double_center(DistanceMatrix(T ** 2, Scale.SQUARED))
        _, Y, _ = embed_kernel(K, p)
        if np.all(np.isfinite(Y)):
            return Y
    except (np.linalg.LinAlgError, ValueError) as exc:
        log.warning("classical MDS initialization failed (%s); using random start", exc)
    rng = np.random.default_rng(seed)
    scale = float(np.mean(T)) if T.size else 1.0
    return 1e-2 * max(scale, 1e-12) * rng.standard_normal((p, T.shape[0]))


def _descend(Y, objective, direction, cfg):
    report = StressReport()
    s = objective(Y)
    report.stresses.append(s)
    report.step_scales.append(0.0)
    for _ in range(cfg.max_iters):
        if s == 0.0:
            break
        step = direction(Y)
        if not np.all(np.isfinite(step)):
            log.warning("non-finite step; stopping")
            break
        scale = 1.0
        accepted = False
        for attempt in range(cfg.max_halvings + 1):
            Yn = Y + scale * step
            sn = objective(Yn)
            if np.isfinite(sn) and sn < s:
                accepted = True
                break
            if attempt < cfg.max_halvings:
                scale *= 0.5
                report.halvings += 1
        if not accepted:
            break
        rel = (s - sn) / s
        Y, s = Yn, sn
        report.stresses.append(s)
        report.step_scales.append(scale)
        if rel < cfg.tolerance:
            break
    return Y, report


def _input_distances(X_or_D):
    if isinstance(X_or_D, DistanceMatrix):
        return X_or_D.raw().values
    return pairwise_euclidean(as_data_matrix(X_or_D)).values


def _start(T, p, cfg, init):
    if init is None:
        return classical_init(T, p, cfg.seed)
    Y = np.array(_embedded(init), dtype=float)
    _check_shapes(T, Y)
    return Y


def _qn_or_gd(cfg):
    def direction_from(grad, hess):
        if cfg.optimizer is Optimizer.GRADIENT_DESCENT:
            return -cfg.learning_rate * grad
        return -cfg.learning_rate * grad / _floored_abs(hess)
    return direction_from


def fit_sammon(X_or_D, p, cfg=None, init=None):
    """Sammon mapping by (diagonal quasi-Newton or gradient) descent.

    ``X_or_D`` is either a d x n data matrix or a :class:`DistanceMatrix`.
    With ``cfg.neighbors`` set, only kNN pairs enter the cost.
    Returns ``(Y, report)`` with ``Y`` of shape p x n.
    """
    cfg = cfg or IterConfig()
    T = _input_distances(X_or_D)
    W, a = _sammon_weights(T, cfg.neighbors)
    Y0 = _start(T, p, cfg, init)
    step = _qn_or_gd(cfg)

    def objective(Y):
        return float(_stress_terms(T, W, a, Y, order=0)[0])

    def direction(Y):
        _, g, h = _stress_terms(T, W, a, Y)
        return step(g, h)

    return _descend(Y0, objective, direction, cfg)


def fit_metric_mds(X_or_D, p, cfg=None, init=None):
    """Metric MDS: unit weights, reported as normalized stress."""
    cfg = cfg or IterConfig()
    T = _input_distances(X_or_D)
    W = pair_counts(T, cfg.neighbors)
    den = float(np.sum(np.triu(T, 1) ** 2))
    if den == 0:
        raise DegenerateInput("all input distances are zero")
    Y0 = _start(T, p, cfg, init)
    step = _qn_or_gd(cfg)

    def objective(Y):
        raw = _stress_terms(T, W, 1.0, Y, order=0)[0]
        return float(np.sqrt(raw / den))

    def direction(Y):
        _, g, h = _stress_terms(T, W, 1.0, Y)
        return step(g, h)

    return _descend(Y0, objective, direction, cfg)


def fit_nonmetric_mds(X_or_D, p, cfg=None, init=None):
    """Kruskal non-metric MDS alternating monotone regression and descent."""
    cfg = cfg or IterConfig()
    T = _input_distances(X_or_D)
    if T.shape[0] < 2:
        raise DegenerateInput("non-metric MDS needs at least 2 points")
    Y0 = _start(T, p, cfg, init)

    def objective(Y):
        try:
            return nonmetric_stress(T, Y)
        except DegenerateInput:
            return float("inf")

    def direction(Y):
        return _nonmetric_direction(T, Y, cfg)

    return _descend(Y0, objective, direction, cfg)

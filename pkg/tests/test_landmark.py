import logging

import numpy as np
import pytest

from manifold_embed.core import DistanceMatrix, Scale, double_center
from manifold_embed.datasets import synth_swiss_roll
from manifold_embed.distance import pairwise_euclidean
from manifold_embed.errors import (
    InvalidDimension,
    InvalidM,
    NonEmbeddableDirection,
    ScaleMismatch,
    ShapeError,
    SingularLandmarkBlock,
)
from manifold_embed.landmark import (
    NystromParts,
    fit_landmark_isomap,
    fit_landmark_mds,
    kernel_parts_from_distance_parts,
    landmark_embed,
    nystrom_complete,
    select_landmarks,
)
from manifold_embed.spectral import fit_classical_mds, fit_isomap

from conftest import max_aligned_dev


def rank_r_psd(rng, n, r):
    F = rng.standard_normal((n, r))
    return F @ F.T


def test_select_landmarks():
    assert list(select_landmarks(7, 7, seed=3)) == list(range(7))
    assert len(select_landmarks(7, 1)) == 1
    assert np.array_equal(select_landmarks(50, 10, 4), select_landmarks(50, 10, 4))
    assert set(select_landmarks(50, 10, 4)) <= set(select_landmarks(50, 11, 4))
    L = select_landmarks(50, 10, 4)
    assert np.all(np.diff(L) > 0)
    for m in (0, 8):
        with pytest.raises(InvalidM):
            select_landmarks(7, m)


def test_parts_validation():
    with pytest.raises(ShapeError):
        NystromParts(np.eye(2), np.zeros((2, 2)), np.array([0, 1]), 5)
    with pytest.raises(ValueError):
        NystromParts(np.eye(2), np.zeros((2, 1)), np.array([1, 0]), 3)
    with pytest.raises(ValueError):
        NystromParts(np.array([[1.0, 2.0], [0.0, 1.0]]), np.zeros((2, 1)), np.array([0, 1]), 3)


def test_nystrom_rank_one(rng):
    v = rng.standard_normal(12)
    K = np.outer(v, v)
    for m in (1, 3):
        parts = NystromParts.from_kernel(K, select_landmarks(12, m, 1))
        assert np.abs(nystrom_complete(parts) - K).max() <= 1e-8 * np.abs(K).max()


def test_nystrom_full(rng):
    K = rank_r_psd(rng, 8, 8)
    parts = NystromParts.from_kernel(K, np.arange(8))
    assert np.allclose(nystrom_complete(parts), K)


def test_nystrom_rank_r(rng):
    for _ in range(5):
        r = int(rng.integers(1, 9))
        K = rank_r_psd(rng, 200, r)
        parts = NystromParts.from_kernel(K, select_landmarks(200, r + 2, int(rng.integers(1e6))))
        assert np.abs(nystrom_complete(parts) - K).max() <= 1e-8 * np.abs(K).max()


def test_nystrom_error_decreases_with_m(rng):
    K = rank_r_psd(rng, 60, 60)
    errs = []
    for m in (5, 15, 30, 45, 60):
        e = [np.abs(nystrom_complete(NystromParts.from_kernel(K, select_landmarks(60, m, s)))
                    - K).max() for s in range(5)]
        errs.append(np.mean(e))
    assert errs[0] > 0
    assert all(b <= a for a, b in zip(errs, errs[1:]))


def test_nystrom_singular_block(rng, caplog):
    K = rank_r_psd(rng, 10, 2)
    parts = NystromParts.from_kernel(K, np.arange(5))
    with pytest.raises(SingularLandmarkBlock):
        nystrom_complete(parts, allow_pinv=False)
    with caplog.at_level(logging.WARNING):
        C = nystrom_complete(parts)
    assert "pseudo-inverse" in caplog.text
    assert np.abs(C - K).max() <= 1e-8 * np.abs(K).max()


def test_landmark_embed_single_landmark():
    parts = NystromParts(np.array([[4.0]]), np.array([[2.0, -6.0]]), np.array([0]), 3)
    Y = landmark_embed(parts, 1)
    assert np.allclose(Y, [[2.0, 1.0, -3.0]])


def test_landmark_embed_guards():
    parts = NystromParts(np.diag([1.0, -1.0]), np.zeros((2, 1)), np.array([0, 1]), 3)
    with pytest.raises(NonEmbeddableDirection):
        landmark_embed(parts, 2)
    with pytest.raises(InvalidDimension):
        landmark_embed(parts, 3)


def test_kernel_parts_full():
    D2 = np.array([[0.0, 4.0], [4.0, 0.0]])
    A, B = kernel_parts_from_distance_parts(D2, np.zeros((2, 0)))
    assert np.allclose(A, [[1, -1], [-1, 1]])
    assert B.shape == (2, 0)


def test_kernel_parts_m_equals_n(rng):
    D2 = pairwise_euclidean(rng.standard_normal((3, 9)), Scale.SQUARED)
    A, _ = kernel_parts_from_distance_parts(D2.values, np.zeros((9, 0)))
    assert np.array_equal(A, double_center(D2))


def test_kernel_parts_against_partitioned_kernel(rng):
    """A matches the landmark-centered full kernel exactly; B matches it once the
    per-column constant it leaves is removed (B carries no landmark-mean offset
    per column, so only H_m B is determined)."""
    n, m = 30, 8
    X = rng.standard_normal((3, n))
    D2 = pairwise_euclidean(X, Scale.SQUARED).values
    L = select_landmarks(n, m, 2)
    O = np.setdiff1d(np.arange(n), L)
    A, B = kernel_parts_from_distance_parts(D2[np.ix_(L, L)], D2[np.ix_(L, O)])
    mu = X[:, L].mean(axis=1, keepdims=True)
    G = (X - mu).T @ (X - mu)  # kernel centered at the landmark mean
    assert np.abs(A - G[np.ix_(L, L)]).max() <= 1e-9 * np.abs(G).max()
    Hm = np.eye(m) - 1.0 / m
    assert np.abs(Hm @ B - Hm @ G[np.ix_(L, O)]).max() <= 1e-9 * np.abs(G).max()


def test_kernel_parts_scale_guard():
    with pytest.raises(ScaleMismatch):
        kernel_parts_from_distance_parts(np.zeros((2, 2)), np.zeros((2, 1)), Scale.RAW)
    with pytest.raises(ShapeError):
        kernel_parts_from_distance_parts(np.zeros((2, 3)), np.zeros((2, 1)))


def test_landmark_mds_full_equals_cmds(rng):
    X = rng.standard_normal((5, 100))
    _, Y = fit_classical_mds(X, 3)
    assert max_aligned_dev(fit_landmark_mds(X, 100, 3), Y) <= 1e-8


def test_landmark_mds_rank_p_distances(rng):
    X = rng.standard_normal((2, 80))
    Y = fit_landmark_mds(X, 4, 2, seed=5)
    D = pairwise_euclidean(X).values
    assert np.abs(pairwise_euclidean(Y).values - D).max() <= 1e-6


def test_landmark_mds_rank_sweep(rng):
    X = rng.standard_normal((3, 60)) * np.array([[5.0], [3.0], [1.0]])
    D = pairwise_euclidean(X).values

    def err(m, p):
        return np.abs(pairwise_euclidean(fit_landmark_mds(X, m, p, seed=0)).values - D).max()
    # three landmarks span only a plane after centering
    assert err(3, 2) > 1e-3
    assert err(6, 3) < 1e-6


def test_landmark_deterministic(rng):
    X = rng.standard_normal((3, 50))
    assert np.array_equal(fit_landmark_mds(X, 10, 2, seed=7), fit_landmark_mds(X, 10, 2, seed=7))


def test_landmark_isomap_full_equals_isomap():
    X, _ = synth_swiss_roll(200, seed=4)
    _, Y = fit_isomap(X, 8, 2)
    assert max_aligned_dev(fit_landmark_isomap(X, 200, 8, 2), Y) <= 1e-8


@pytest.mark.slow
def test_landmark_isomap_swiss_roll_vs_full():
    X, _ = synth_swiss_roll(2000, seed=0)
    Yl = fit_landmark_isomap(X, 100, 10, 2, seed=0)
    _, Yf = fit_isomap(X, 10, 2)
    sub = np.random.default_rng(1).choice(2000, 500, replace=False)
    iu = np.triu_indices(500, 1)
    r = np.corrcoef(pairwise_euclidean(Yl[:, sub]).values[iu],
                    pairwise_euclidean(Yf[:, sub]).values[iu])[0, 1]
    assert r > 0.99

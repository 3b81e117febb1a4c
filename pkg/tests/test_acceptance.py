"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import logging
import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.sparse as sp

from manifold_embed.core import DistanceMatrix, Scale, double_center
from manifold_embed.datasets import synth_swiss_roll
from manifold_embed.distance import (
    NeighborGraph,
    floyd_warshall,
    geodesic_distances,
    knn_graph,
    pairwise_euclidean,
)
from manifold_embed.errors import Disconnected
from manifold_embed.iterative import (
    IterConfig,
    Optimizer,
    fit_metric_mds,
    fit_nonmetric_mds,
    fit_sammon,
    sammon_cost,
    sammon_gradient,
    sammon_hessian_diag,
)
from manifold_embed.kernel import (
    KernelKind,
    KernelSpec,
    distance_kernels,
    kernel_isomap_correct,
    kernel_isomap_cstar,
)
from manifold_embed.landmark import (
    NystromParts,
    fit_landmark_mds,
    nystrom_complete,
    select_landmarks,
)
from manifold_embed.oos import (
    kernel_map_apply,
    kernel_map_fit,
    oos_embed_eigen,
    oos_embed_isomap_landmark_formula,
)
from manifold_embed.quality import residual_variance
from manifold_embed.spectral import (
    fit_classical_mds,
    fit_isomap,
    fit_kernel_isomap,
    fit_kernel_mds,
    fit_pca,
)

from conftest import max_aligned_dev, sign_align


@pytest.fixture(autouse=True)
def quiet_warnings():
    # singular-landmark and clamping warnings are expected in some instances
    logging.disable(logging.WARNING)
    yield
    logging.disable(logging.NOTSET)


def test_c01_pca_equals_classical_mds(criterion):
    rng = np.random.default_rng(101)
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(20):
        X = rng.standard_normal((10, 50))
        p = (2, 5)[i % 2]
        _, Y = fit_classical_mds(X, p)
        P = fit_pca(X, p)
        worst = max(worst, max_aligned_dev(Y, P) / np.abs(P).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 5.0
    criterion(1, ok, f"PCA vs classical MDS: max rel dev {worst:.2e} (<=1e-8), "
                     f"{elapsed:.2f}s (<5s)")
    assert ok


def test_c02_double_centering_identity(criterion):
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(20):
        X = rng.standard_normal((int(rng.integers(1, 8)), int(rng.integers(2, 60))))
        X -= X.mean(axis=1, keepdims=True)
        G = X.T @ X
        K = double_center(pairwise_euclidean(X, Scale.SQUARED))
        worst = max(worst, np.abs(K - G).max() / np.abs(G).max())
    ok = worst <= 1e-9
    criterion(2, ok, f"Gram vs -1/2 HDH: max rel dev {worst:.2e} (<=1e-9)")
    assert ok


def _fd(Dx, Y, h1=1e-6, h2=1e-4):
    g = np.zeros_like(Y)
    H = np.zeros_like(Y)
    c0 = sammon_cost(Dx, Y)
    for idx in np.ndindex(Y.shape):
        E = np.zeros_like(Y)
        E[idx] = h1
        g[idx] = (sammon_cost(Dx, Y + E) - sammon_cost(Dx, Y - E)) / (2 * h1)
        E[idx] = h2
        H[idx] = (sammon_cost(Dx, Y + E) - 2 * c0 + sammon_cost(Dx, Y - E)) / h2 ** 2
    return g, H


def test_c03_sammon_derivatives(criterion):
    rng = np.random.default_rng(103)
    worst_g = worst_h = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 16))
        p = int(rng.integers(1, 4))
        Dx = pairwise_euclidean(rng.standard_normal((5, n)))
        Y = rng.standard_normal((p, n))
        g_fd, h_fd = _fd(Dx, Y)
        eg = np.linalg.norm(sammon_gradient(Dx, Y) - g_fd) / np.linalg.norm(g_fd)
        eh = np.linalg.norm(sammon_hessian_diag(Dx, Y) - h_fd) / np.linalg.norm(h_fd)
        worst_g, worst_h = max(worst_g, eg), max(worst_h, eh)
    ok = worst_g < 1e-5 and worst_h < 1e-3
    criterion(3, ok, f"Sammon FD check: gradient rel err {worst_g:.2e} (<1e-5), "
                     f"second derivative rel err {worst_h:.2e} (<1e-3)")
    assert ok


def test_c04_monotone_stress(criterion):
    rng = np.random.default_rng(104)
    solvers = (fit_sammon, fit_metric_mds, fit_nonmetric_mds)
    violations = 0
    for run in range(50):
        n = int(rng.integers(5, 30))
        X = rng.standard_normal((int(rng.integers(2, 6)), n))
        cfg = IterConfig(max_iters=int(rng.integers(10, 80)),
                         learning_rate=float(rng.uniform(0.1, 1.5)),
                         optimizer=list(Optimizer)[run % 2],
                         seed=run,
                         neighbors=int(rng.integers(2, n)) if run % 5 == 0 else None)
        fit = solvers[run % 3]
        if fit is fit_nonmetric_mds:
            cfg = IterConfig(max_iters=cfg.max_iters, learning_rate=cfg.learning_rate,
                             optimizer=cfg.optimizer, seed=run)
        init = rng.standard_normal((int(rng.integers(1, 4)), n)) if run % 2 else None
        p = init.shape[0] if init is not None else 2
        _, rep = fit(X, p, cfg, init=init)
        violations += int(np.any(np.diff(rep.stresses) > 0))
    Y2, _ = fit_sammon(np.array([[0.0, 2.0]]), 1, IterConfig(), init=np.array([[0.3, 0.4]]))
    gap = abs(abs(Y2[0, 1] - Y2[0, 0]) - 2.0)
    ok = violations == 0 and gap <= 1e-8
    criterion(4, ok, f"stress traces: {violations}/50 runs increased; "
                     f"2-point Sammon |d_y-d_x| = {gap:.2e} (<=1e-8)")
    assert ok


def _random_connected_graph(rng, n):
    W = np.zeros((n, n))
    order = rng.permutation(n)
    for a in range(1, n):
        b = order[rng.integers(0, a)]
        W[order[a], b] = W[b, order[a]] = rng.uniform(0.05, 3.0)
    extra = np.triu(rng.random((n, n)) < rng.uniform(0.02, 0.3), 1)
    w = rng.uniform(0.05, 3.0, size=(n, n))
    W[extra] = w[extra]
    W = np.maximum(W, W.T)
    return NeighborGraph(n, sp.csr_matrix(W))


def test_c05_geodesics_match_floyd_warshall(criterion):
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(20):
        G = _random_connected_graph(rng, int(rng.integers(2, 51)))
        worst = max(worst, np.abs(geodesic_distances(G).values - floyd_warshall(G)).max())
    ok = worst <= 1e-10
    criterion(5, ok, f"Dijkstra vs Floyd-Warshall: max abs dev {worst:.2e} (<=1e-10)")
    assert ok


def _min_eig(K):
    return float(np.linalg.eigvalsh(K).min())


def test_c06_kernel_isomap_psd(criterion):
    rng = np.random.default_rng(106)
    worst = -np.inf
    indefinite = 0
    done = attempts = 0
    while done < 50 or (indefinite == 0 and attempts < 1000):
        attempts += 1
        n = int(rng.integers(10, 60))
        X = rng.standard_normal((int(rng.integers(2, 5)), n))
        try:
            Dg = geodesic_distances(knn_graph(pairwise_euclidean(X), int(rng.integers(3, 8))))
        except Disconnected:
            continue
        K_D2, K_D = distance_kernels(Dg)
        if _min_eig(K_D2) < -1e-8 * np.abs(K_D2).max():
            indefinite += 1
        Kp = kernel_isomap_correct(K_D2, K_D, kernel_isomap_cstar(K_D2, K_D))
        worst = max(worst, -_min_eig(Kp) / np.abs(Kp).max())
        done += 1
    ok = worst <= 1e-8 and indefinite > 0 and done >= 50
    criterion(6, ok, f"kernel Isomap over {done} datasets: worst -min eig/|K'|max "
                     f"{worst:.2e} (<=1e-8); {indefinite} uncorrected kernels indefinite (>=1)")
    assert ok


def test_c07_nystrom_exactness(criterion):
    rng = np.random.default_rng(107)
    n = 200
    worst = 0.0
    for i in range(20):
        r = 1 + i % 8
        F = rng.standard_normal((n, r))
        K = F @ F.T
        parts = NystromParts.from_kernel(K, select_landmarks(n, r + 2, seed=1000 + i))
        worst = max(worst, np.abs(nystrom_complete(parts) - K).max() / np.abs(K).max())
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    K = (Q * (1.0 / (1.0 + np.arange(n)) ** 2)) @ Q.T
    ms = [2, 5, 10, 20, 40, 80, 120, 160, 200]
    errs = np.mean([[np.abs(nystrom_complete(NystromParts.from_kernel(
        K, select_landmarks(n, m, seed))) - K).max() for m in ms] for seed in range(10)], axis=0)
    monotone = bool(np.all(np.diff(errs) <= 0))
    ok = worst <= 1e-8 and monotone
    criterion(7, ok, f"Nystrom rank-r exactness rel err {worst:.2e} (<=1e-8); "
                     f"mean error vs m monotone: {monotone} "
                     f"({errs[0]:.1e} at m={ms[0]} -> {errs[-1]:.1e} at m={ms[-1]})")
    assert ok


def test_c08_landmark_mds_full(criterion):
    X = np.random.default_rng(108).standard_normal((6, 100))
    _, Y = fit_classical_mds(X, 3)
    dev = max_aligned_dev(fit_landmark_mds(X, 100, 3, seed=0), Y)
    ok = dev <= 1e-8
    criterion(8, ok, f"landmark MDS (m=n=100) vs classical MDS: max dev {dev:.2e} (<=1e-8)")
    assert ok


def test_c09_oos_self_consistency(criterion):
    rng = np.random.default_rng(109)
    X = rng.standard_normal((3, 80))
    roll, _ = synth_swiss_roll(800, seed=9)
    fits = [fit_classical_mds(X, 2), fit_kernel_mds(X, KernelSpec(KernelKind.RBF), 2),
            fit_kernel_mds(X, KernelSpec(KernelKind.COSINE), 2),
            fit_isomap(X, 10, 2), fit_kernel_isomap(X, 10, 2)]
    eig = max(np.abs(oos_embed_eigen(m, X) - Y).max() for m, Y in fits)
    iso, Yr = fit_isomap(roll, 10, 2)
    eig = max(eig, np.abs(oos_embed_eigen(iso, roll) - Yr).max())

    km_worst, km_checked = 0.0, 0
    for Xs, Y in ((X, fits[0][1]), (X, fits[3][1]), (X, fit_sammon(X, 2)[0])):
        kmap = kernel_map_fit(Xs, Y)
        if kmap.condition < 1e8:
            km_checked += 1
            km_worst = max(km_worst, np.abs(kernel_map_apply(kmap, Xs) - Y).max())

    Xt = roll[:, rng.choice(800, 40, replace=False)] + 0.1 * rng.standard_normal((3, 40))
    a = oos_embed_eigen(iso, Xt)
    b = oos_embed_isomap_landmark_formula(iso, Xt)
    route = float(np.abs(sign_align(a, b) - b).max())
    ok = eig <= 1e-8 and km_checked > 0 and km_worst <= 1e-6 and route <= 1e-6
    criterion(9, ok, f"OOS: eigen self-map {eig:.2e} (<=1e-8); kernel-map self-map "
                     f"{km_worst:.2e} on {km_checked} well-conditioned fits (<=1e-6); "
                     f"Isomap routes differ by {route:.2e} (<=1e-6)")
    assert ok


def test_c10_swiss_roll(criterion):
    X, _ = synth_swiss_roll(1000, noise=0.0, seed=0)
    t0 = time.perf_counter()
    model, Yi = fit_isomap(X, 10, 2)
    elapsed = time.perf_counter() - t0
    Dg = model.geodesic
    rv_iso = residual_variance(Dg, pairwise_euclidean(Yi).values)
    _, Yc = fit_classical_mds(X, 2)
    rv_cmds = residual_variance(Dg, pairwise_euclidean(Yc).values)
    ok = rv_iso < 0.05 and rv_iso < rv_cmds and elapsed < 60
    criterion(10, ok, f"Swiss roll n=1000 k=10: Isomap residual variance {rv_iso:.4f} (<0.05), "
                      f"classical MDS {rv_cmds:.4f}; Isomap fit {elapsed:.2f}s (<60s)")
    assert ok


def test_c11_zero_mean_embeddings(criterion):
    rng = np.random.default_rng(111)
    roll, _ = synth_swiss_roll(400, seed=11)
    worst = 0.0
    for X in (rng.standard_normal((5, 60)), 100 * rng.standard_normal((3, 40)) + 7, roll):
        fits = [fit_classical_mds(X, 2)[1],
                fit_kernel_mds(X, KernelSpec(KernelKind.RBF), 2)[1],
                fit_kernel_mds(X, KernelSpec(KernelKind.COSINE), 2)[1],
                fit_isomap(X, 12, 2)[1], fit_kernel_isomap(X, 12, 2)[1], fit_pca(X, 2)]
        worst = max(worst, max(np.abs(Y.mean(axis=1)).max() for Y in fits))
    ok = worst <= 1e-9
    criterion(11, ok, f"spectral embeddings: max |row mean| {worst:.2e} (<=1e-9)")
    assert ok


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "manifold_embed", *args],
                          capture_output=True, text=True, check=True)


def test_c12_determinism(criterion, tmp_path):
    runs = {
        "cmds": ["--method", "cmds"],
        "kisomap": ["--method", "kisomap", "--k", "10"],
        "sammon": ["--method", "sammon", "--iters", "40"],
        "nmmds": ["--method", "nmmds", "--iters", "10"],
        "lisomap": ["--method", "lisomap", "--k", "10", "--landmarks", "60"],
    }
    outputs = {}
    for rep in range(2):
        d = tmp_path / f"run{rep}"
        d.mkdir()
        _cli("synth", "swiss-roll", "--n", "700", "--seed", "4", "--output", str(d / "roll.csv"))
        for name, args in runs.items():
            _cli("fit", *args, "--seed", "4", "--input", str(d / "roll.csv"),
                 "--output", str(d / f"{name}.csv"), "--model", str(d / f"{name}.model"))
        _cli("transform", "--model", str(d / "kisomap.model"), "--input", str(d / "roll.csv"),
             "--output", str(d / "oos.csv"))
        outputs[rep] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    differ = sorted(k for k in outputs[0] if outputs[0][k] != outputs[1].get(k))
    ok = not differ and len(outputs[0]) == 2 * len(runs) + 2
    criterion(12, ok, f"two full CLI runs, {len(outputs[0])} files compared: "
                      f"{'all byte-identical' if not differ else 'differ: ' + ', '.join(differ)}")
    assert ok

"""Command-line interface: ``manifold-embed {fit,transform,synth,bench}``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import store
from .datasets import synth_swiss_roll
from .distance import geodesic_distances, knn_graph, pairwise_euclidean
from .errors import Disconnected, EmbedError
from .fileio import atomic_write, points_csv, read_table, write_embedding
from .iterative import IterConfig, Optimizer, fit_metric_mds, fit_nonmetric_mds, fit_sammon
from .kernel import KernelKind, KernelSpec
from .landmark import fit_landmark_isomap, fit_landmark_mds
from .oos import (
    KernelMap,
    kernel_map_apply,
    kernel_map_fit,
    oos_embed_eigen,
    oos_embed_isomap_landmark_formula,
)
from .quality import quality_report
from .spectral import (
    Method,
    SpectralModel,
    fit_classical_mds,
    fit_isomap,
    fit_kernel_isomap,
    fit_kernel_mds,
    fit_pca,
)

log = logging.getLogger("manifold_embed")

METHODS = ("cmds", "kmds", "isomap", "kisomap", "sammon", "mmds", "nmmds", "lmds", "lisomap", "pca")
SPECTRAL = {"cmds", "kmds", "isomap", "kisomap"}
GRAPH = {"isomap", "kisomap", "lisomap"}
NEEDS_K = GRAPH
NEEDS_M = {"lmds", "lisomap"}
OOS_ROUTES = ("eigen", "landmark-formula", "kernel-map")


class ConfigError(EmbedError):
    pass


@dataclass
class RunConfig:
    command: str
    method: str | None = None
    input: str | None = None
    output: str | None = None
    model: str | None = None
    p: int = 2
    k: int | None = None
    m: int | None = None
    gamma: float = 0.5
    eta: float = 0.3
    iters: int = 500
    seed: int = 0
    kernel: str = "rbf"
    bandwidth: float | None = None
    optimizer: str = "qn"
    neighbors: int | None = None
    plot: str | None = None
    labels: str | None = None
    summary: str | None = None
    oos: str | None = None
    test_as_intermediate: bool = False
    methods: list = field(default_factory=list)
    n: int = 1000
    noise: float = 0.0
    intrinsic: str | None = None

    def validate(self):
        if self.command == "fit":
            if self.method not in METHODS:
                raise ConfigError(f"unknown method {self.method!r}")
            self.check_method(self.method)
        if self.command == "bench":
            bad = [m for m in self.methods if m not in METHODS]
            if bad:
                raise ConfigError(f"unknown method(s) {bad}")
        if self.p < 1:
            raise ConfigError("--dim must be at least 1")

    def check_method(self, method):
        if method in NEEDS_K and self.k is None:
            raise ConfigError(f"method {method} requires --k")
        if method in NEEDS_M and self.m is None:
            raise ConfigError(f"method {method} requires --landmarks")

    def iter_config(self):
        return IterConfig(max_iters=self.iters, learning_rate=self.eta,
                          optimizer=Optimizer(self.optimizer), seed=self.seed,
                          neighbors=self.neighbors)


@dataclass
class FitResult:
    Y: np.ndarray
    model: SpectralModel | None = None
    clamped: int = 0


def fit_method(method, X, cfg):
    """Run one embedding method on a d x n matrix."""
    p = cfg.p
    if method == "cmds":
        model, Y = fit_classical_mds(X, p)
    elif method == "kmds":
        spec = KernelSpec(KernelKind(cfg.kernel), bandwidth=cfg.bandwidth)
        model, Y = fit_kernel_mds(X, spec, p)
    elif method == "isomap":
        model, Y = fit_isomap(X, cfg.k, p)
    elif method == "kisomap":
        model, Y = fit_kernel_isomap(X, cfg.k, p)
    elif method == "pca":
        return FitResult(fit_pca(X, p))
    elif method == "sammon":
        return FitResult(fit_sammon(X, p, cfg.iter_config())[0])
    elif method == "mmds":
        return FitResult(fit_metric_mds(X, p, cfg.iter_config())[0])
    elif method == "nmmds":
        return FitResult(fit_nonmetric_mds(X, p, cfg.iter_config())[0])
    elif method == "lmds":
        return FitResult(fit_landmark_mds(X, cfg.m, p, cfg.seed))
    elif method == "lisomap":
        return FitResult(fit_landmark_isomap(X, cfg.m, cfg.k, p, cfg.seed))
    else:
        raise ConfigError(f"unknown method {method!r}")
    return FitResult(Y, model, model.clamped_count)


def reference_distances(X, k=None):
    """Geodesic distances when ``k`` is given and the graph is connected, else Euclidean."""
    D = pairwise_euclidean(X)
    if k is None:
        return D.values, "euclidean"
    try:
        return geodesic_distances(knn_graph(D, k)).values, f"geodesic(k={k})"
    except Disconnected as exc:
        log.warning("reference graph disconnected (%d components); using Euclidean",
                    exc.n_components)
        return D.values, "euclidean"


def summary_text(rows):
    lines = ["metric,value"]
    for key, val in rows:
        lines.append(f"{key},{val!r}" if isinstance(val, float) else f"{key},{val}")
    return "\n".join(lines) + "\n"


def save_plot(path, Y, labels=None, title=None):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    Y = np.atleast_2d(Y)
    x = Y[0]
    y = Y[1] if Y.shape[0] > 1 else np.zeros_like(x)
    fig, ax = plt.subplots(figsize=(5, 5))
    if labels is None:
        ax.scatter(x, y, s=6)
    else:
        classes = sorted(set(labels))
        cmap = plt.get_cmap("tab10" if len(classes) <= 10 else "tab20")
        lab = np.array(labels)
        for i, c in enumerate(classes):
            sel = lab == c
            ax.scatter(x[sel], y[sel], s=6, color=cmap(i % cmap.N), label=str(c))
        if len(classes) <= 20:
            ax.legend(markerscale=2, fontsize="small")
    ax.set_xlabel("dim_0")
    ax.set_ylabel("dim_1")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    tmp = f"{path}.tmp.png"
    fig.savefig(tmp, metadata={"Software": None})
    plt.close(fig)
    os.replace(tmp, path)


def cmd_fit(cfg):
    table = read_table(cfg.input, cfg.labels)
    X = table.points
    t0 = time.perf_counter()
    res = fit_method(cfg.method, X, cfg)
    runtime = time.perf_counter() - t0
    write_embedding(cfg.output, res.Y)

    model_path = cfg.model or f"{cfg.output}.model"
    if res.model is not None:
        store.save_spectral(model_path, res.model, res.Y, cfg.method)
    else:
        try:
            store.save_kernel_map(model_path, kernel_map_fit(X, res.Y, cfg.gamma), cfg.method)
        except EmbedError as exc:
            log.warning("no model written: %s", exc)
            model_path = None

    if cfg.method in GRAPH:
        if res.model is not None and res.model.geodesic is not None:
            D_ref, ref = res.model.geodesic, f"geodesic(k={cfg.k})"
        else:
            D_ref, ref = reference_distances(X, cfg.k)
    else:
        D_ref, ref = pairwise_euclidean(X).values, "euclidean"
    report = quality_report(D_ref, res.Y, runtime, ref, res.clamped)
    rows = [("method", cfg.method), ("n", X.shape[1]), ("p", cfg.p)] + report.rows()
    if cfg.method in GRAPH:
        rows.append(("graph_components", 1))
    if res.model is not None and res.model.c_used is not None:
        rows += [("c_star", res.model.c_star), ("c_used", res.model.c_used)]
    if model_path:
        rows.append(("model", model_path))
    text = summary_text(rows)
    sys.stdout.write(text)
    if cfg.summary:
        atomic_write(cfg.summary, text)
    if cfg.plot:
        save_plot(cfg.plot, res.Y, table.labels, title=cfg.method)
    return 0


def cmd_transform(cfg):
    meta, model, Y_train = store.load(cfg.model)
    X_t = read_table(cfg.input, cfg.labels).points
    route = cfg.oos or ("eigen" if isinstance(model, SpectralModel) else "kernel-map")
    if route == "eigen":
        if not isinstance(model, SpectralModel):
            raise ConfigError(f"eigenfunction route needs a spectral model, not {meta['method']}")
        Yt = oos_embed_eigen(model, X_t, test_as_intermediate=cfg.test_as_intermediate)
    elif route == "landmark-formula":
        if not isinstance(model, SpectralModel) or model.method is not Method.ISOMAP:
            raise ConfigError("landmark-formula route needs an Isomap model")
        Yt = oos_embed_isomap_landmark_formula(model, X_t,
                                               test_as_intermediate=cfg.test_as_intermediate)
    elif route == "kernel-map":
        kmap = model if isinstance(model, KernelMap) else kernel_map_fit(model.X, Y_train, cfg.gamma)
        Yt = kernel_map_apply(kmap, X_t)
    else:
        raise ConfigError(f"unknown OOS route {route!r}")
    write_embedding(cfg.output, Yt)
    if cfg.plot:
        save_plot(cfg.plot, Yt, title=f"{meta['method']} ({route})")
    return 0


def cmd_synth(cfg):
    X, intrinsic = synth_swiss_roll(cfg.n, cfg.noise, cfg.seed)
    atomic_write(cfg.output, points_csv(X, ["x", "y", "z"]))
    if cfg.intrinsic:
        atomic_write(cfg.intrinsic, points_csv(intrinsic, ["arclength", "height"]))
    return 0


def cmd_bench(cfg):
    X = read_table(cfg.input, cfg.labels).points
    k = cfg.k if cfg.k is not None else 10
    D_ref, ref = reference_distances(X, k)
    header = ["method", "normalized_stress", "sammon_stress", "residual_variance",
              "runtime_seconds", "reference", "status"]
    lines = [",".join(header)]
    for method in cfg.methods:
        mcfg = RunConfig(**{**cfg.__dict__, "k": k,
                            "m": cfg.m if cfg.m is not None else min(X.shape[1], 100)})
        t0 = time.perf_counter()
        try:
            mcfg.check_method(method)
            res = fit_method(method, X, mcfg)
        except EmbedError as exc:
            lines.append(",".join([method, "", "", "", "", ref,
                                   f"error:{type(exc).__name__}"]))
            continue
        rep = quality_report(D_ref, res.Y, time.perf_counter() - t0, ref, res.clamped)
        lines.append(",".join([method, repr(rep.normalized_stress), repr(rep.sammon_stress),
                               repr(rep.residual_variance), f"{rep.runtime_seconds:.3f}",
                               ref, "ok"]))
    text = "\n".join(lines) + "\n"
    atomic_write(cfg.output, text)
    sys.stdout.write(text)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="manifold-embed",
                                     description="MDS-family dimensionality reduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="embed a dataset")
    fit.add_argument("--method", required=True, choices=METHODS)
    fit.add_argument("--input", required=True)
    fit.add_argument("--output", required=True)
    fit.add_argument("--model", help="model file (default: OUTPUT.model)")
    fit.add_argument("--summary", help="also write the quality summary here")
    _common(fit)

    tr = sub.add_parser("transform", help="embed new points with a fitted model")
    tr.add_argument("--model", required=True)
    tr.add_argument("--input", required=True)
    tr.add_argument("--output", required=True)
    tr.add_argument("--oos", choices=OOS_ROUTES)
    tr.add_argument("--gamma", type=float, default=0.5)
    tr.add_argument("--labels")
    tr.add_argument("--plot")
    tr.add_argument("--test-as-intermediate", action="store_true",
                    help="let geodesic paths pass through test points")

    sy = sub.add_parser("synth", help="generate a synthetic dataset")
    sy.add_argument("dataset", choices=["swiss-roll"])
    sy.add_argument("--n", type=int, default=1000)
    sy.add_argument("--noise", type=float, default=0.0)
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--output", required=True)
    sy.add_argument("--intrinsic", help="write intrinsic coordinates here")

    be = sub.add_parser("bench", help="compare methods on one dataset")
    be.add_argument("--input", required=True)
    be.add_argument("--methods", required=True,
                    type=lambda s: [m.strip() for m in s.split(",") if m.strip()])
    be.add_argument("--output", required=True)
    _common(be)
    return parser


def _common(p):
    p.add_argument("--dim", dest="p", type=int, default=2)
    p.add_argument("--k", type=int)
    p.add_argument("--landmarks", dest="m", type=int)
    p.add_argument("--kernel", choices=["linear", "cosine", "rbf"], default="rbf")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--lr", dest="eta", type=float, default=0.3)
    p.add_argument("--optimizer", choices=["qn", "gd"], default="qn")
    p.add_argument("--neighbors", type=int, help="kNN-restricted stress (iterative methods)")
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plot")
    p.add_argument("--labels", help="label column (header name or index)")


def config_from_args(args):
    fields = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in vars(args).items() if k in fields})
    cfg.validate()
    return cfg


COMMANDS = {"fit": cmd_fit, "transform": cmd_transform, "synth": cmd_synth, "bench": cmd_bench}


def run(cfg):
    """Execute a validated :class:`RunConfig`; returns the process exit code."""
    return COMMANDS[cfg.command](cfg)


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run(config_from_args(args))
    except EmbedError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

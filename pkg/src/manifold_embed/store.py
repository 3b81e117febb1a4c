"""Round-tripping fitted models through the container format in :mod:`fileio`."""

from __future__ import annotations

import numpy as np

from .distance import knn_graph, pairwise_euclidean
from .errors import ModelFormatError
from .fileio import load_model, save_model
from .kernel import KernelKind, KernelSpec
from .oos import KernelMap
from .spectral import Method, SpectralModel


def save_spectral(path, model, Y, method_name):
    meta = {
        "kind": "spectral",
        "method": method_name,
        "spectral_method": model.method.value,
        "p": model.p,
        "clamped_count": model.clamped_count,
        "kernel": model.kernel.kind.value if model.kernel else None,
        "bandwidth": model.bandwidth,
        "k": model.k,
        "c_used": model.c_used,
        "c_star": model.c_star,
    }
    arrays = {
        "X": model.X,
        "Y": Y,
        "eigenvalues": model.eigenvalues,
        "eigenvectors": model.eigenvectors,
        "train_kernel": model.train_kernel,
    }
    if model.geodesic is not None:
        arrays["geodesic"] = model.geodesic
    save_model(path, meta, arrays)


def save_kernel_map(path, kmap, method_name):
    meta = {"kind": "kernel_map", "method": method_name, "p": kmap.p,
            "gamma": kmap.gamma, "condition": kmap.condition}
    save_model(path, meta, {"X": kmap.X, "Y": kmap.Y, "A": kmap.A, "sigmas": kmap.sigmas})


def load(path):
    """Return ``(meta, model, Y_train)``; ``model`` is a SpectralModel or KernelMap."""
    meta, arrays = load_model(path)
    try:
        if meta["kind"] == "spectral":
            method = Method(meta["spectral_method"])
            spec = None
            if meta["kernel"] is not None:
                spec = KernelSpec(KernelKind(meta["kernel"]), bandwidth=meta["bandwidth"])
            graph = None
            if meta["k"] is not None:
                graph = knn_graph(pairwise_euclidean(arrays["X"]), meta["k"])
            model = SpectralModel(
                method, arrays["eigenvalues"], arrays["eigenvectors"], arrays["train_kernel"],
                arrays["X"], meta["p"], meta["clamped_count"], kernel=spec,
                bandwidth=meta["bandwidth"], k=meta["k"], c_used=meta["c_used"],
                c_star=meta["c_star"], geodesic=arrays.get("geodesic"), graph=graph)
            return meta, model, arrays["Y"]
        if meta["kind"] == "kernel_map":
            kmap = KernelMap(arrays["A"], arrays["sigmas"], meta["gamma"], arrays["X"],
                             arrays["Y"], meta["condition"])
            return meta, kmap, arrays["Y"]
    except KeyError as exc:
        raise ModelFormatError(f"model file missing field {exc}") from None
    raise ModelFormatError(f"unknown model kind {meta.get('kind')!r}")

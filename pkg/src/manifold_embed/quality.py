"""Embedding quality metrics reported by the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .distance import pairwise_euclidean
from .errors import EmbedError
from .iterative import metric_stress, sammon_cost


@dataclass
class QualityReport:
    normalized_stress: float
    sammon_stress: float
    residual_variance: float
    runtime_seconds: float
    reference: str = "euclidean"
    clamped_eigenvalues: int = 0

    def rows(self):
        return list(asdict(self).items())


def residual_variance(D_ref, D_emb):
    """``1 - R^2`` between the upper triangles of two distance matrices, in [0, 1]."""
    D_ref = np.asarray(D_ref, dtype=float)
    D_emb = np.asarray(D_emb, dtype=float)
    iu = np.triu_indices(D_ref.shape[0], k=1)
    a, b = D_ref[iu], D_emb[iu]
    if a.size < 2 or a.std() == 0 or b.std() == 0:
        return 1.0
    r = np.corrcoef(a, b)[0, 1]
    return float(np.clip(1.0 - r * r, 0.0, 1.0))


def quality_report(D_ref, Y, runtime, reference="euclidean", clamped=0):
    D_emb = pairwise_euclidean(Y).values
    try:
        s = metric_stress(D_ref, Y, normalized=True)
    except EmbedError:
        s = float("nan")
    try:
        sam = sammon_cost(D_ref, Y)
    except EmbedError:
        sam = float("nan")
    return QualityReport(s, sam, residual_variance(D_ref, D_emb), float(runtime),
                         reference, int(clamped))

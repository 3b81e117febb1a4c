"""Multidimensional scaling, Sammon mapping, Isomap and their landmark and
out-of-sample extensions."""

from .core import DistanceMatrix, EigenSystem, Scale, double_center, pseudo_inverse, sym_eig
from .distance import floyd_warshall, geodesic_distances, knn_graph, pairwise_euclidean
from .iterative import (
    IterConfig,
    Optimizer,
    StressReport,
    fit_metric_mds,
    fit_nonmetric_mds,
    fit_sammon,
    metric_stress,
    nonmetric_stress,
    sammon_cost,
)
from .kernel import KernelKind, KernelSpec, build_kernel
from .landmark import fit_landmark_isomap, fit_landmark_mds, nystrom_complete
from .oos import (
    kernel_map_apply,
    kernel_map_fit,
    oos_embed_eigen,
    oos_embed_isomap_landmark_formula,
)
from .spectral import (
    SpectralModel,
    fit_classical_mds,
    fit_isomap,
    fit_kernel_isomap,
    fit_kernel_mds,
    fit_pca,
)

__version__ = "0.1.0"

"""Diagnostics: empirical cdfs, limiting laws, soft-edge statistics."""

from .airy import airy
from .equilibrium import (
    EquilibriumMeasure,
    arcsine,
    equilibrium_classical,
    equilibrium_polynomial,
    marchenko_pastur,
    semicircle,
)
from .edge import edge_rescale
from .ks import EmpiricalCDF, ks_distance, ks_two_sample
from .tracy_widom import airy_kernel, tracy_widom2_cdf, tracy_widom2_cdf_many

__all__ = [
    "EmpiricalCDF",
    "EquilibriumMeasure",
    "airy",
    "airy_kernel",
    "arcsine",
    "edge_rescale",
    "equilibrium_classical",
    "equilibrium_polynomial",
    "ks_distance",
    "ks_two_sample",
    "marchenko_pastur",
    "semicircle",
    "tracy_widom2_cdf",
    "tracy_widom2_cdf_many",
]

"""Finite-n spectra, eigenvector shapes and limiting processes of the critical
one-dimensional random Schroedinger operator."""

from ._core import (
    __version__,
    arcsine_cdf,
    decay_slope,
    dos,
    eigen_condition,
    eigenvalues,
    eigenvector,
    energy_context,
    gap_statistics,
    intensity_check,
    ks_two_sample,
    peak,
    rho,
    run_cli,
    sample_limit_shape,
    sample_model,
    sample_sch_star,
    shape_measure,
    sturm_count,
)

__all__ = [
    "__version__",
    "arcsine_cdf",
    "decay_slope",
    "dos",
    "eigen_condition",
    "eigenvalues",
    "eigenvector",
    "energy_context",
    "gap_statistics",
    "intensity_check",
    "ks_two_sample",
    "peak",
    "rho",
    "run_cli",
    "sample_limit_shape",
    "sample_model",
    "sample_sch_star",
    "shape_measure",
    "sturm_count",
]

"""Adaptive Lagrange finite elements for Laplace eigenvalue clusters in 2D."""

from ._clusterfem import (
    FeSpace,
    Mesh,
    SparseSymMatrix,
    __version__,
    assemble_mass,
    assemble_stiffness,
    build_initial,
    doerfler_mark,
    eta_indicators,
    fit_rate,
    prolongation,
    refine,
    run_afem,
    smallest_eigenpairs,
    two_level_report,
    uniform_refine,
)

__all__ = [
    "FeSpace",
    "Mesh",
    "SparseSymMatrix",
    "__version__",
    "assemble_mass",
    "assemble_stiffness",
    "build_initial",
    "doerfler_mark",
    "eta_indicators",
    "fit_rate",
    "prolongation",
    "refine",
    "run_afem",
    "smallest_eigenpairs",
    "to_scipy",
    "two_level_report",
    "uniform_refine",
]


def to_scipy(matrix):
    """Convert a SparseSymMatrix to a scipy CSR matrix."""
    from scipy.sparse import csr_matrix

    rows, cols, vals = matrix.triplets()
    return csr_matrix((vals, (rows, cols)), shape=(matrix.n, matrix.n))

"""Sparse-grid pseudospectral polynomial chaos and variance-based sensitivity."""
from .patterson import patterson_rule
from .pce import PCESurrogate, gram_matrix, n_terms, project, total_degree_indices
from .sensitivity import (
    ZeroVarianceError,
    conditional_mean,
    correlations,
    sobol_indices,
    statistics,
    total_indices,
)
from .sparse_grid import SparseGrid, build_grid, grid_size

__all__ = [
    "PCESurrogate",
    "SparseGrid",
    "ZeroVarianceError",
    "build_grid",
    "conditional_mean",
    "correlations",
    "gram_matrix",
    "grid_size",
    "n_terms",
    "patterson_rule",
    "project",
    "sobol_indices",
    "statistics",
    "total_degree_indices",
    "total_indices",
]

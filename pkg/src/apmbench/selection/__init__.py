from .eigen import eigendecompose_symmetric, jacobi_eigh
from .factor import (
    correlation_matrix,
    entropy_filter,
    explained_variance,
    parallel_analysis,
    pca_loadings,
    select_representatives,
    shannon_entropy,
    varimax_criterion,
    varimax_rotate,
)
from .pipeline import ScoreMatrix, SelectionReport, select_attributes
from .synthetic import planted_factor_scores

__all__ = [
    "ScoreMatrix", "SelectionReport", "correlation_matrix", "eigendecompose_symmetric", "entropy_filter",
    "explained_variance", "jacobi_eigh", "parallel_analysis", "pca_loadings", "planted_factor_scores",
    "select_attributes", "select_representatives", "shannon_entropy", "varimax_criterion", "varimax_rotate",
]

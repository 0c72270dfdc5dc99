"""Planted-factor score matrices for exercising the selection pipeline offline."""
from __future__ import annotations

import numpy as np

from ..rng import make_rng
from .pipeline import ScoreMatrix


def planted_factor_scores(n_rows: int = 5000, n_factors: int = 2, per_factor: int = 6, top_loading: float = 0.8,
                          step: float = 0.1, noise_sd: float = 0.2, seed: int = 0,
                          discretize: bool = True) -> tuple[ScoreMatrix, list[int]]:
    """Blocks of attributes driven by independent latent factors.

    Within block ``f`` attribute ``i`` loads ``top_loading - i * step`` on
    factor ``f`` and nothing else, so the block's first attribute is the
    planted representative. Noise has standard deviation ``noise_sd``.
    With ``discretize`` the values become integer 1-10 judge-style scores.
    Returns the matrix and the representative column indices.
    """
    rng = make_rng(seed, "planted")
    factors = rng.standard_normal((n_rows, n_factors))
    cols, names, reps = [], [], []
    for f in range(n_factors):
        reps.append(len(cols))
        for i in range(per_factor):
            lam = top_loading - i * step
            cols.append(lam * factors[:, f] + noise_sd * rng.standard_normal(n_rows))
            names.append(f"f{f + 1}_a{i + 1}")
    x = np.column_stack(cols)
    if discretize:
        x = np.clip(np.rint(5.5 + 2.0 * x), 1, 10)
    return ScoreMatrix(x, names), reps

"""Entropy filter, correlation, parallel analysis, PCA loadings and Varimax."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidConfigError,
    InvalidDimensionError,
    NonConvergenceError,
)
from ..rng import make_rng
from .eigen import jacobi_eigh

ENTROPY_THRESHOLD = 1.5


def shannon_entropy(column) -> float:
    """Entropy in bits of the empirical distribution of the (integer) scores in ``column``."""
    col = np.asarray(column).ravel()
    if col.size == 0:
        raise EmptyInputError("cannot take the entropy of an empty column")
    _, counts = np.unique(col, return_counts=True)
    p = counts / col.size
    return float(-np.sum(p * np.log2(p)) + 0.0)


def entropy_filter(scores, tau: float = ENTROPY_THRESHOLD):
    """Indices of columns with entropy >= tau, and all column entropies."""
    s = np.asarray(scores)
    ent = np.array([shannon_entropy(s[:, j]) for j in range(s.shape[1])])
    return np.flatnonzero(ent >= tau), ent


def correlation_matrix(scores) -> np.ndarray:
    """Z^T Z / (n - 1) for column-standardised ``scores``."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] < 2:
        raise InvalidDimensionError("need a 2-d score matrix with at least two rows")
    sd = s.std(axis=0, ddof=1)
    if np.any(sd == 0):
        bad = np.flatnonzero(sd == 0).tolist()
        raise InvalidConfigError(f"zero-variance columns reached the correlation step: {bad}")
    z = (s - s.mean(axis=0)) / sd
    corr = z.T @ z / (s.shape[0] - 1)
    corr = (corr + corr.T) / 2
    np.fill_diagonal(corr, 1.0)
    return np.clip(corr, -1.0, 1.0)


@dataclass
class ParallelAnalysis:
    k_max: int
    thresholds: np.ndarray
    observed: np.ndarray
    surrogate: np.ndarray  # (T, n_cols), descending per row


def surrogate_eigenvalues(n_rows: int, n_cols: int, n_surrogates: int, seed: int) -> np.ndarray:
    out = np.empty((n_surrogates, n_cols))
    for t in range(n_surrogates):
        x = make_rng(seed, "surrogate", t).standard_normal((n_rows, n_cols))
        out[t] = jacobi_eigh(correlation_matrix(x))[0]
    return out


def parallel_analysis(observed_eigenvalues, n_rows: int, n_cols: int | None = None, n_surrogates: int = 100,
                      percentile: float = 95.0, seed: int = 0, rule: str = "leading") -> ParallelAnalysis:
    """Horn's parallel analysis against Gaussian surrogates of the same shape.

    ``rule="count"`` counts every rank whose observed eigenvalue beats the
    surrogate percentile at that rank; ``rule="leading"`` stops at the first
    rank that does not.
    """
    obs = np.sort(np.asarray(observed_eigenvalues, dtype=np.float64))[::-1]
    if n_cols is not None and n_cols != obs.size:
        raise DimensionMismatchError(f"{obs.size} observed eigenvalues for {n_cols} columns")
    if n_surrogates < 1:
        raise InvalidConfigError("need at least one surrogate dataset")
    if not 0 < percentile < 100:
        raise InvalidConfigError("percentile must be in (0, 100)")
    if n_rows < 2 or obs.size < 1:
        raise InvalidDimensionError("degenerate data shape")
    sur = surrogate_eigenvalues(n_rows, obs.size, n_surrogates, seed)
    thr = np.percentile(sur, percentile, axis=0)
    above = obs > thr
    if rule == "count":
        k_max = int(above.sum())
    elif rule == "leading":
        k_max = int(np.argmin(above)) if not above.all() else int(above.size)
    else:
        raise InvalidConfigError(f"unknown parallel-analysis rule {rule!r}")
    return ParallelAnalysis(k_max, thr, obs, sur)


def pca_loadings(eigenvalues, eigenvectors, k: int) -> np.ndarray:
    """Columns ``eigenvector_j * sqrt(lambda_j)`` for the top ``k`` components."""
    w = np.asarray(eigenvalues, dtype=np.float64)
    v = np.asarray(eigenvectors, dtype=np.float64)
    if not 1 <= k <= w.size:
        raise InvalidConfigError(f"k must be in [1, {w.size}], got {k}")
    return v[:, :k] * np.sqrt(np.clip(w[:k], 0.0, None))


def explained_variance(eigenvalues, k: int) -> float:
    w = np.asarray(eigenvalues, dtype=np.float64)
    return float(np.sum(w[:k]) / np.sum(w))


def varimax_criterion(loadings) -> float:
    """Sum over components of the variance (over attributes) of squared loadings."""
    sq = np.asarray(loadings) ** 2
    return float(np.sum(np.mean(sq ** 2, axis=0) - np.mean(sq, axis=0) ** 2))


@dataclass
class VarimaxResult:
    loadings: np.ndarray
    rotation: np.ndarray
    criterion_trace: list
    iterations: int
    normalize: bool


def varimax_rotate(loadings, normalize: bool = True, tol: float = 1e-8, max_iter: int = 1000) -> VarimaxResult:
    """Kaiser's Varimax by successive pairwise planar rotations.

    Each pair of columns is rotated by the angle that maximises the criterion
    for that pair, so the criterion never decreases. A sweep visits every
    pair; iteration stops once a sweep improves the criterion by less than
    ``tol``. With ``normalize`` the rows are scaled to unit communality before
    rotating (Kaiser normalisation) and scaled back afterwards.
    """
    lo = np.array(loadings, dtype=np.float64)
    if lo.ndim != 2 or lo.shape[1] < 2:
        raise InvalidDimensionError("varimax needs at least two components")
    p, k = lo.shape
    h = np.sqrt(np.sum(lo ** 2, axis=1))
    if normalize:
        h_safe = np.where(h > 0, h, 1.0)
        b = lo / h_safe[:, None]
    else:
        b = lo.copy()
    rot = np.eye(k)
    trace = [varimax_criterion(b)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        for i in range(k - 1):
            for j in range(i + 1, k):
                x, y = b[:, i], b[:, j]
                u = x * x - y * y
                v = 2 * x * y
                num = 2 * np.sum(u * v) - 2 * np.sum(u) * np.sum(v) / p
                den = np.sum(u * u - v * v) - (np.sum(u) ** 2 - np.sum(v) ** 2) / p
                phi = np.arctan2(num, den) / 4
                if phi == 0.0:
                    continue
                c, s = np.cos(phi), np.sin(phi)
                g = np.array([[c, -s], [s, c]])
                b[:, [i, j]] = b[:, [i, j]] @ g
                rot[:, [i, j]] = rot[:, [i, j]] @ g
        trace.append(varimax_criterion(b))
        if trace[-1] - trace[-2] < tol:
            converged = True
            break
    if not converged:
        last = VarimaxResult(lo @ rot, rot, trace, it, normalize)
        raise NonConvergenceError(f"varimax did not converge in {max_iter} iterations", last=last)
    return VarimaxResult(lo @ rot, rot, trace, it, normalize)


def sort_components(loadings, rotation=None):
    """Order components by sum of squared loadings (descending)."""
    ssl = np.sum(np.asarray(loadings) ** 2, axis=0)
    order = np.argsort(-ssl, kind="stable")
    lo = np.asarray(loadings)[:, order]
    return (lo, None) if rotation is None else (lo, np.asarray(rotation)[:, order])


def select_representatives(rotated_loadings, k: int | None = None) -> list[int]:
    """One attribute per component by largest |loading|.

    Ties go to the lowest attribute index; an attribute already chosen for an
    earlier component is skipped in favour of the next-highest one.
    """
    lo = np.abs(np.asarray(rotated_loadings, dtype=np.float64))
    if lo.ndim != 2:
        raise InvalidDimensionError("loadings must be a 2-d matrix")
    k = lo.shape[1] if k is None else k
    if not 1 <= k <= lo.shape[1]:
        raise InvalidConfigError(f"k must be in [1, {lo.shape[1]}], got {k}")
    if k > lo.shape[0]:
        raise InvalidConfigError("more components than attributes")
    chosen: list[int] = []
    for j in range(k):
        for a in np.lexsort((np.arange(lo.shape[0]), -lo[:, j])):
            if int(a) not in chosen:
                chosen.append(int(a))
                break
    return chosen

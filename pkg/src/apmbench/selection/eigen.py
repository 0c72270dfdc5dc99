"""Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

Rotations are applied in round-robin (chess tournament) order: each round
annihilates ``n // 2`` disjoint off-diagonal pairs at once, and ``n - 1``
rounds visit every pair exactly once, so one round-robin pass is one cyclic
sweep.
"""
from __future__ import annotations

import numpy as np

from ..errors import InvalidDimensionError, NonConvergenceError, NonSymmetricError

SYMMETRY_TOL = 1e-8


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        ps, qs = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a >= 0 and b >= 0:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(matrix, tol: float = 1e-10, max_sweeps: int = 100):
    """Eigenvalues (descending) and orthonormal eigenvectors (columns) of a symmetric matrix.

    Stops when the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||A||_F)``. Each eigenvector is sign-normalised so its
    largest-magnitude component is positive.
    """
    a = np.array(matrix, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidDimensionError(f"need a nonempty square matrix, got shape {a.shape}")
    asym = float(np.max(np.abs(a - a.T)))
    if asym > SYMMETRY_TOL:
        raise NonSymmetricError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    a = (a + a.T) / 2
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if off_norm(a) < tol * scale:
            break
        for ps, qs in rounds:
            apq = a[ps, qs]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = ps[active], qs[active], apq[active]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e150
            th = np.where(big, 1.0, theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0)))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(n)
            rot[p, p] = c
            rot[q, q] = c
            rot[p, q] = s
            rot[q, p] = -s
            a = rot.T @ a @ rot
            v = v @ rot
    else:
        if off_norm(a) >= tol * scale:
            raise NonConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", last=(np.diag(a).copy(), v))
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    flip = v[np.argmax(np.abs(v), axis=0), np.arange(n)] < 0
    v[:, flip] *= -1
    return w, v


def eigendecompose_symmetric(matrix, tol: float = 1e-10, max_sweeps: int = 100):
    return jacobi_eigh(matrix, tol=tol, max_sweeps=max_sweeps)

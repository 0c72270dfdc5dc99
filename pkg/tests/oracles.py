"""Independent reference computations used only by the tests."""
import numpy as np


def negative_count(a: np.ndarray, shifts: np.ndarray) -> np.ndarray:
    """Number of eigenvalues of symmetric ``a`` below each shift, by Sylvester's law of inertia.

    Gaussian elimination without pivoting on ``a - sigma I`` (an LDL^T
    factorisation); the count of negative pivots equals the count of
    eigenvalues below sigma. Zero pivots are nudged to a tiny negative value.
    """
    n = a.shape[0]
    s = np.asarray(shifts, dtype=np.float64)
    work = np.repeat(a[None, :, :], s.size, axis=0).astype(np.float64)
    work[:, np.arange(n), np.arange(n)] -= s[:, None]
    count = np.zeros(s.size, dtype=int)
    tiny = 1e-300
    for k in range(n):
        piv = work[:, k, k].copy()
        piv[piv == 0] = -tiny
        count += piv < 0
        if k + 1 < n:
            col = work[:, k + 1:, k] / piv[:, None]
            work[:, k + 1:, k + 1:] -= col[:, :, None] * work[:, k, None, k + 1:]
    return count


def bisection_eigenvalues(a: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues (descending) by simultaneous bisection on the inertia count."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    radius = np.max(np.sum(np.abs(a), axis=1))  # Gershgorin bound
    lo = np.full(n, -radius - 1.0)
    hi = np.full(n, radius + 1.0)
    # eigenvalue i (ascending) is the smallest x with count(x) > i
    target = np.arange(n)
    while np.max(hi - lo) > tol * max(1.0, radius):
        mid = (lo + hi) / 2
        below = negative_count(a, mid) > target
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    return np.sort((lo + hi) / 2)[::-1]


def brute_force_margin_label(plus, minus):
    """Scan every (j, direction) in order; a strictly larger |margin| replaces the incumbent."""
    best_j, best_abs = 0, -1.0
    for j in range(len(plus)):
        m = plus[j] - minus[j]
        if abs(m) > best_abs:
            best_j, best_abs = j, abs(m)
    m = plus[best_j] - minus[best_j]
    if m == 0:
        return 0, 1
    return best_j, 1 if m > 0 else -1


def brute_force_topk(vectors, ids, query, k):
    sims = []
    for uid, v in zip(ids, vectors):
        sims.append((-(float(np.dot(v, query)) / (np.linalg.norm(v) * np.linalg.norm(query))), uid))
    sims.sort()
    return [uid for _, uid in sims[:k]]

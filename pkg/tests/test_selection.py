import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from apmbench.errors import (DimensionMismatchError, EmptyInputError, InvalidConfigError, InvalidDimensionError,
                             NonConvergenceError, NonSymmetricError)
from apmbench.selection import (
    ScoreMatrix, correlation_matrix, entropy_filter, explained_variance, jacobi_eigh, parallel_analysis,
    pca_loadings, planted_factor_scores, select_attributes, select_representatives, shannon_entropy,
    varimax_criterion, varimax_rotate,
)
from apmbench.records import dumps
from oracles import bisection_eigenvalues


# -- entropy and correlation --------------------------------------------------

def test_entropy_closed_forms():
    assert shannon_entropy([4, 4, 4]) == 0.0
    assert shannon_entropy([1, 2] * 50) == pytest.approx(1.0)
    assert shannon_entropy(np.arange(1, 11)) == pytest.approx(np.log2(10))
    with pytest.raises(EmptyInputError):
        shannon_entropy([])


def test_entropy_filter_soundness():
    rng = np.random.default_rng(0)
    s = np.column_stack([rng.integers(1, 11, 300), np.full(300, 5), rng.integers(4, 6, 300)])
    keep, ent = entropy_filter(s, 1.5)
    assert keep.tolist() == [0]
    assert all(ent[j] >= 1.5 for j in keep) and all(ent[j] < 1.5 for j in set(range(3)) - set(keep))


def test_correlation_examples():
    rng = np.random.default_rng(1)
    x = rng.integers(1, 11, 500).astype(float)
    c = correlation_matrix(np.column_stack([x, x, 11 - x]))
    assert c[0, 1] == pytest.approx(1.0) and c[0, 2] == pytest.approx(-1.0)
    big = correlation_matrix(rng.standard_normal((10_000, 4)))
    assert np.max(np.abs(big - np.eye(4))) < 0.05
    with pytest.raises(InvalidConfigError):
        correlation_matrix(np.column_stack([x, np.ones_like(x)]))


# -- eigensolver -------------------------------------------------------------

def test_jacobi_trivial_cases():
    w, v = jacobi_eigh(np.eye(3))
    assert np.allclose(w, 1)
    w, v = jacobi_eigh(np.diag([1.0, 3.0]))
    assert np.allclose(w, [3, 1]) and np.allclose(np.abs(v), [[0, 1], [1, 0]])
    with pytest.raises(NonSymmetricError):
        jacobi_eigh(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_jacobi_non_convergence_carries_last_iterate():
    a = np.random.default_rng(0).standard_normal((6, 6))
    with pytest.raises(NonConvergenceError) as exc:
        jacobi_eigh(a + a.T, max_sweeps=1)
    assert exc.value.last is not None


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_jacobi_matches_bisection_oracle(n, seed):
    a = np.random.default_rng(seed).standard_normal((n, n))
    a = (a + a.T) / 2
    w, v = jacobi_eigh(a)
    assert np.max(np.abs(w - bisection_eigenvalues(a))) < 1e-6
    assert np.max(np.abs(a - v @ np.diag(w) @ v.T)) < 1e-8
    assert np.max(np.abs(v.T @ v - np.eye(n))) < 1e-8
    assert np.all(np.diff(w) <= 1e-12)


def test_jacobi_repeated_eigenvalues():
    q, _ = np.linalg.qr(np.random.default_rng(4).standard_normal((5, 5)))
    a = q @ np.diag([2.0, 2.0, 2.0, -1.0, 0.0]) @ q.T
    a = (a + a.T) / 2
    w, v = jacobi_eigh(a)
    assert np.allclose(w, [2, 2, 2, 0, -1], atol=1e-9)
    assert np.max(np.abs(a - v @ np.diag(w) @ v.T)) < 1e-8


# -- parallel analysis ------------------------------------------------------

def test_parallel_analysis_pure_noise_mostly_zero():
    hits = 0
    for seed in range(20):
        x = np.random.default_rng(1000 + seed).standard_normal((300, 6))
        w, _ = jacobi_eigh(correlation_matrix(x))
        hits += parallel_analysis(w, 300, 6, n_surrogates=50, seed=seed).k_max > 0
    assert hits <= 4


def test_parallel_analysis_errors():
    with pytest.raises(DimensionMismatchError):
        parallel_analysis(np.ones(3), 100, n_cols=4)
    with pytest.raises(InvalidConfigError):
        parallel_analysis(np.ones(3), 100, n_surrogates=0)
    with pytest.raises(InvalidConfigError):
        parallel_analysis(np.ones(3), 100, percentile=100)


# -- loadings and varimax ------------------------------------------------------

def test_pca_loadings_columns():
    a = np.array([[2.0, 0.5], [0.5, 1.0]])
    w, v = jacobi_eigh(a)
    lo = pca_loadings(w, v, 2)
    assert np.allclose(lo, v * np.sqrt(w))
    assert explained_variance(w, 1) == pytest.approx(w[0] / w.sum())


def test_varimax_fixed_point_on_sparse_loadings():
    lo = np.array([[0.9, 0], [0.8, 0], [0, 0.7], [0, 0.6]])
    res = varimax_rotate(lo)
    assert np.allclose(np.abs(res.loadings), lo, atol=1e-10)
    assert res.criterion_trace[-1] == pytest.approx(res.criterion_trace[0])


@pytest.mark.parametrize("normalize", [True, False])
def test_varimax_recovers_rotated_sparse(normalize):
    sparse = np.array([[0.9, 0], [0.8, 0], [0.7, 0], [0, 0.85], [0, 0.75], [0, 0.65]])
    t = np.pi / 4
    rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    res = varimax_rotate(sparse @ rot, normalize=normalize)
    rec = res.loadings
    # up to column sign and permutation
    match = min(np.max(np.abs(np.abs(rec) - np.abs(sparse))), np.max(np.abs(np.abs(rec[:, ::-1]) - np.abs(sparse))))
    assert match < 1e-6
    assert np.all(np.diff(res.criterion_trace) >= -1e-15)
    assert np.allclose(np.sum(rec ** 2, axis=1), np.sum(sparse ** 2, axis=1), atol=1e-8)
    assert np.allclose(res.rotation.T @ res.rotation, np.eye(2), atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 10), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_varimax_properties_random(p, k, seed):
    k = min(k, p)
    lo = np.random.default_rng(seed).standard_normal((p, k))
    res = varimax_rotate(lo)
    assert np.all(np.diff(res.criterion_trace) >= -1e-12)
    assert np.allclose(res.loadings @ res.loadings.T, lo @ lo.T, atol=1e-7)
    assert varimax_criterion(res.loadings) >= varimax_criterion(lo) - 1e-9 or res.normalize


def test_varimax_needs_two_components():
    with pytest.raises(InvalidDimensionError):
        varimax_rotate(np.ones((3, 1)))


def test_select_representatives_rules():
    assert select_representatives(np.array([[0.9, 0.1], [0.2, 0.8], [0.1, 0.1]])) == [0, 1]
    assert select_representatives(np.array([[0.1, 0.2], [-0.9, 0.1]]), 1) == [1]
    # duplicate top attribute -> next best for the later component
    assert select_representatives(np.array([[0.9, 0.8], [0.1, 0.5]])) == [0, 1]
    # ties go to the lowest index
    assert select_representatives(np.array([[0.5, 0.0], [0.5, 0.0], [0.0, 0.3]]), 1) == [0]


# -- pipeline ------------------------------------------------------------------

def test_pipeline_planted_and_deterministic(tmp_path):
    matrix, reps = planted_factor_scores(n_rows=2000, seed=3)
    r1 = select_attributes(matrix, n_surrogates=30, seed=1)
    r2 = select_attributes(matrix, n_surrogates=30, seed=1)
    assert r1.k_max == 2 and sorted(r1.representatives) == sorted(reps)
    assert dumps(r1.to_record()) == dumps(r2.to_record())
    path = tmp_path / "scores.csv"
    matrix.write(path)
    again = ScoreMatrix.read(path)
    assert again.names == matrix.names and np.array_equal(again.scores, matrix.scores)


def test_pipeline_errors():
    matrix, _ = planted_factor_scores(n_rows=500, seed=0)
    with pytest.raises(EmptyInputError):
        select_attributes(matrix, tau=10.0, n_surrogates=5)
    with pytest.raises(InvalidConfigError):
        select_attributes(matrix, k=5, n_surrogates=10)

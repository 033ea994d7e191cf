import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.distance import cdist

from pda.baselines import (
    BaselineScorer,
    baseline_scores,
    grid_weights_2d,
    klpe_score,
    knn_score,
    knn_sum_score,
    lof_score,
    sample_simplex_weights,
    scalarize,
)
from pda.criteria import coordinate_criteria, cross_stack, pairwise_stack
from pda.detector import score_many, train
from pda.evaluation import auc
from pda.pareto import InvalidInputError


def test_simplex_weights():
    W = sample_simplex_weights(2, 100_000, seed=3)
    assert W[:, 0].mean() == pytest.approx(0.5, abs=0.01)
    W6 = sample_simplex_weights(6, 500, seed=1)
    assert np.all(W6 >= 0) and np.allclose(W6.sum(axis=1), 1.0, atol=1e-12)
    assert np.array_equal(W6, sample_simplex_weights(6, 500, seed=1))
    with pytest.raises(InvalidInputError):
        sample_simplex_weights(1, 5, seed=0)


def test_grid_weights():
    W = grid_weights_2d(100)
    assert W[0].tolist() == [0.0, 1.0] and W[-1].tolist() == [1.0, 0.0]
    assert grid_weights_2d(2).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert grid_weights_2d(3).tolist() == [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]


def test_knn_examples():
    assert knn_score([1, 2, 3, 4], 2) == 2 and knn_sum_score([1, 2, 3, 4], 2) == 3
    assert knn_sum_score([4, 1, 3], 1) == knn_score([4, 1, 3], 1) == 1
    assert knn_score([1, 1, 2], 2) == 1 and knn_sum_score([1, 1, 2], 2) == 2
    with pytest.raises(InvalidInputError):
        knn_score([1, 2], 2)


def _cluster(rng, n=50):
    X = rng.normal(0, 1.0, size=(n, 2))
    return X, cdist(X, X)


def test_klpe_examples(rng):
    X, S = _cluster(rng)
    centre = np.argmin(np.linalg.norm(X - X.mean(axis=0), axis=1))
    d_in = cdist(X[centre : centre + 1], X)[0]
    assert 1 - klpe_score(d_in, S, 6) >= 0.9
    d_far = np.full(50, 1e6)
    assert klpe_score(d_far, S, 6) == 1.0
    with pytest.raises(InvalidInputError):
        klpe_score(d_in, S, 49)


def test_lof_examples(rng):
    # regular simplex: all pairwise distances equal
    S = np.ones((5, 5)) - np.eye(5)
    assert lof_score(np.ones(5), S, 2) == pytest.approx(1.0)
    ang = rng.random(40) * 2 * np.pi
    rad = rng.random(40)
    X = np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))
    S = cdist(X, X)
    assert lof_score(cdist([[100.0, 0.0]], X)[0], S, 6) > 10
    # more than k duplicates: zero k-distance, finite score
    Xd = np.vstack([np.zeros((8, 2)), rng.random((10, 2))])
    Sd = cdist(Xd, Xd)
    v = lof_score(cdist([[0.0, 0.0]], Xd)[0], Sd, 3)
    assert np.isfinite(v)
    with pytest.raises(InvalidInputError):
        lof_score(np.ones(5), S[:5, :5], 5)


def _lof_oracle(S, d, k):
    """Direct LOF with tie-inclusive k-distance neighbourhoods."""
    N = S.shape[0]

    def kdist(row, exclude=None):
        r = np.array([row[j] for j in range(N) if j != exclude])
        return np.sort(r)[k - 1]

    kd = [kdist(S[i], i) for i in range(N)]

    def lrd(row, kd_self, exclude=None):
        nb = [j for j in range(N) if j != exclude and row[j] <= kd_self]
        reach = [max(kd[j], row[j]) for j in nb]
        return len(nb) / max(sum(reach), 1e-12 * len(nb)), nb

    lrds = [lrd(S[i], kd[i], i)[0] for i in range(N)]
    l_q, nb = lrd(d, kdist(d))
    return np.mean([lrds[j] for j in nb]) / l_q


def test_lof_matches_oracle(rng):
    X = np.round(rng.random((30, 2)) * 4) / 4
    S = cdist(X, X)
    for q in rng.random((5, 2)):
        d = cdist([q], X)[0]
        assert lof_score(d, S, 4) == pytest.approx(_lof_oracle(S, d, 4), rel=1e-12)


def test_scalarize_one_hot(rng):
    M = rng.random((3, 6, 6))
    for l in range(3):
        assert np.array_equal(scalarize(M, np.eye(3)[l]), M[l])
    with pytest.raises(InvalidInputError):
        scalarize(M, [0.5, 0.5])


@given(st.integers(0, 2**31 - 1))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    X = np.round(rng.random((25, 2)) * 3) / 3
    Q = rng.random((6, 2))
    S, T = cdist(X, X), cdist(Q, X)
    p = rng.permutation(25)
    a = BaselineScorer(S, 4).all(T)
    b = BaselineScorer(S[np.ix_(p, p)], 4).all(T[:, p])
    for m in a:
        assert np.allclose(a[m], b[m], rtol=1e-12, atol=0), m


@given(st.integers(0, 2**31 - 1))
def test_monotone_transforms(seed):
    rng = np.random.default_rng(seed)
    X, Q = rng.random((20, 2)), rng.random((5, 2))
    S, T = cdist(X, X), cdist(Q, X)
    f = lambda v: v**3 + 2 * v  # noqa: E731
    a = BaselineScorer(S, 3).all(T)
    b = BaselineScorer(f(S), 3).all(f(T))
    assert np.array_equal(a["klpe"], b["klpe"])
    assert np.allclose(b["knn"], f(a["knn"]))
    assert not np.allclose(b["knn_sum"], a["knn_sum"])


def test_scalarization_witness_changes_knn_but_not_pda():
    # training points on a grid; two test points, one off in x and one off in y
    g = np.arange(6, dtype=float)
    X = np.array([(a, b) for a in g for b in g])
    Q = np.array([[2.5, 8.0], [9.0, 2.5]])
    crit = coordinate_criteria(2)
    stack = pairwise_stack(list(X), crit)
    T = cross_stack(list(Q), list(X), crit)
    w = np.array([0.5, 0.5])
    before = baseline_scores(stack.matrices, T, w, k=3)["knn"]
    f = np.array([1e-3, 1.0])
    after = baseline_scores(stack.scaled(f).matrices, T * f[:, None, None], w, k=3)["knn"]
    assert np.sign(before[0] - before[1]) != np.sign(after[0] - after[1])
    m0 = train(stack)
    m1 = train(stack.scaled(f))
    s0, _ = score_many(m0, T)
    s1, _ = score_many(m1, T * f[:, None, None])
    assert np.array_equal(s0, s1)


def test_baselines_separate_outliers(rng):
    X = rng.normal(size=(80, 2))
    Q = np.vstack([rng.normal(size=(20, 2)), rng.normal(size=(20, 2)) * 5])
    y = np.r_[np.zeros(20), np.ones(20)]
    res = BaselineScorer(cdist(X, X), 6).all(cdist(Q, X))
    for m, s in res.items():
        assert auc(s, y) > 0.8, m

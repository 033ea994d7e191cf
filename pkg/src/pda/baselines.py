"""Single-criterion detectors run on linearly scalarised dissimilarities."""

from __future__ import annotations

import numpy as np

from .pareto import InvalidInputError

METHODS = ("knn", "knn_sum", "klpe", "lof")
LRD_EPS = 1e-12


def sample_simplex_weights(K: int, count: int, seed) -> np.ndarray:
    """``count`` i.i.d. uniform draws from the (K-1)-simplex, shape (count, K)."""
    if K < 2:
        raise InvalidInputError("simplex weights need K >= 2")
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    rng = np.random.default_rng(seed)
    e = rng.standard_exponential((count, K))
    return e / e.sum(axis=1, keepdims=True)


def grid_weights_2d(count: int) -> np.ndarray:
    """Evenly spaced (w, 1-w) from (0, 1) to (1, 0)."""
    if count < 2:
        raise InvalidInputError("count must be >= 2")
    w1 = np.linspace(0.0, 1.0, count)
    return np.column_stack((w1, 1.0 - w1))


def scalarize(matrices, w) -> np.ndarray:
    """Weighted sum over the leading criterion axis."""
    M = np.asarray(matrices, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (M.shape[0],):
        raise InvalidInputError(f"need {M.shape[0]} weights, got {w.shape}")
    return np.tensordot(w, M, axes=1)


def _check_k(k: int, N: int, limit: int) -> None:
    if not 1 <= k < limit:
        raise InvalidInputError(f"k={k} out of range for N={N}")


def knn_score(distances, k: int) -> float:
    """Distance to the kth nearest training sample."""
    d = np.asarray(distances, dtype=np.float64)
    _check_k(k, d.size, d.size)
    return float(np.partition(d, k - 1)[k - 1])


def knn_sum_score(distances, k: int) -> float:
    """Sum of distances to the k nearest training samples."""
    d = np.asarray(distances, dtype=np.float64)
    _check_k(k, d.size, d.size)
    return float(np.partition(d, k - 1)[:k].sum())


def klpe_score(distances, train_matrix, k: int) -> float:
    """One minus the rank-based p-value of the kth-NN distance."""
    S = np.asarray(train_matrix, dtype=np.float64)
    _check_k(k, S.shape[0], S.shape[0] - 1)
    return float(BaselineScorer(S, k).klpe(np.asarray(distances, dtype=np.float64)[None, :])[0])


def lof_score(distances, train_matrix, k: int) -> float:
    """Local outlier factor of a test point against the training set."""
    S = np.asarray(train_matrix, dtype=np.float64)
    _check_k(k, S.shape[0], S.shape[0])
    return float(BaselineScorer(S, k).lof(np.asarray(distances, dtype=np.float64)[None, :])[0])


class BaselineScorer:
    """Training-side statistics for one scalarised matrix, reused across tests.

    LOF neighbourhoods include every point tied at the k-distance, so all
    scores are independent of how the training set is indexed.
    """

    def __init__(self, train_matrix, k: int = 6):
        S = np.asarray(train_matrix, dtype=np.float64)
        N = S.shape[0]
        if S.shape != (N, N):
            raise InvalidInputError("training matrix must be square")
        _check_k(k, N, N)
        self.k = k
        self.N = N
        D = S.copy()
        np.fill_diagonal(D, np.inf)
        self._kdist = np.partition(D, k - 1, axis=1)[:, k - 1]
        self._g_sorted = np.sort(self._kdist)
        self._lrd = self._lrd_of(D, self._kdist)

    def _lrd_of(self, D: np.ndarray, kdist_rows: np.ndarray) -> np.ndarray:
        mask = D <= kdist_rows[:, None]
        reach = np.maximum(self._kdist[None, :], D)
        total = np.where(mask, reach, 0.0).sum(axis=1)
        count = mask.sum(axis=1)
        return count / np.maximum(total, LRD_EPS * count)

    def _nearest(self, T: np.ndarray) -> np.ndarray:
        return np.partition(T, self.k - 1, axis=1)[:, : self.k]

    def knn(self, T: np.ndarray, nearest=None) -> np.ndarray:
        nearest = self._nearest(T) if nearest is None else nearest
        return nearest.max(axis=1)

    def knn_sum(self, T: np.ndarray, nearest=None) -> np.ndarray:
        nearest = self._nearest(T) if nearest is None else nearest
        return nearest.sum(axis=1)

    def klpe(self, T: np.ndarray, nearest=None) -> np.ndarray:
        if self.k > self.N - 2:
            raise InvalidInputError("k-LPE needs k <= N-2 for leave-one-out")
        g = self.knn(T, nearest)
        at_least = self.N - np.searchsorted(self._g_sorted, g, side="left")
        return 1.0 - at_least / self.N

    def lof(self, T: np.ndarray, nearest=None) -> np.ndarray:
        kd = self.knn(T, nearest)
        mask = T <= kd[:, None]
        lrd_t = self._lrd_of(T, kd)
        nb_lrd = np.where(mask, self._lrd[None, :], 0.0).sum(axis=1) / mask.sum(axis=1)
        return nb_lrd / lrd_t

    def all(self, T, methods=METHODS) -> dict[str, np.ndarray]:
        T = np.asarray(T, dtype=np.float64)
        nearest = self._nearest(T)
        return {m: getattr(self, m)(T, nearest) for m in methods}


def baseline_scores(train_stack, test_cross, w, k: int = 6, methods=METHODS) -> dict[str, np.ndarray]:
    """Scores of every method for one weight vector.

    ``train_stack`` is (K, N, N), ``test_cross`` is (K, n, N).
    """
    return BaselineScorer(scalarize(train_stack, w), k).all(scalarize(test_cross, w), methods)

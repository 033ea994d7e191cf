"""Pareto depth analysis anomaly detector."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .criteria import Criterion, DissimilarityStack, cross_stack, read_stack_manifest, write_stack
from .io import write_json
from .pareto import SORTERS, FrontLedger, InvalidInputError, read_ledger_depths, write_ledger_csv


def _knn_order(D: np.ndarray) -> np.ndarray:
    """Row-wise neighbour order excluding self; ties broken by index."""
    D = np.array(D, dtype=np.float64)
    np.fill_diagonal(D, np.inf)
    return np.argsort(D, axis=1, kind="stable")[:, :-1]


def knn_graph_connected(order: np.ndarray, k: int) -> bool:
    """Is the symmetric k-NN graph built from ``order`` connected?"""
    N = order.shape[0]
    rows = np.repeat(np.arange(N), k)
    cols = order[:, :k].ravel()
    G = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(N, N))
    n_comp, _ = connected_components(G, directed=False)
    return n_comp == 1


def choose_k(stack: DissimilarityStack) -> tuple[int, ...]:
    """Start at ceil(ln N) and grow until each criterion's k-NN graph connects."""
    N = stack.N
    if N < 3:
        raise InvalidInputError("choose_k needs N >= 3")
    start = min(max(1, math.ceil(math.log(N))), N - 1)
    ks = []
    for D in stack.matrices:
        order = _knn_order(D)
        k = start
        while k < N - 1 and not knn_graph_connected(order, k):
            k += 1
        ks.append(k)
    return tuple(ks)


def training_dyads(stack: DissimilarityStack) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All N-choose-2 dyads in row-major upper-triangle order, with pair indices."""
    i, j = np.triu_indices(stack.N, 1)
    Y = np.ascontiguousarray(stack.matrices[:, i, j].T)
    return Y, i, j


@dataclass(frozen=True, eq=False)
class AnomalyScore:
    value: float
    depths: np.ndarray
    s: int


@dataclass(frozen=True, eq=False)
class PdaModel:
    """Frozen training state: dissimilarities, fronts and neighbour counts."""

    stack: DissimilarityStack
    ledger: FrontLedger
    k: tuple[int, ...]
    sorter: str = "jensen"
    criteria: Sequence[Criterion] | None = field(default=None, repr=False)
    train_samples: Sequence | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.stack.N

    @property
    def K(self) -> int:
        return self.stack.K

    @property
    def M(self) -> int:
        return self.ledger.M

    @property
    def s(self) -> int:
        return int(sum(self.k))

    def to_train_dissimilarities(self, samples) -> np.ndarray:
        """(K, n, N) dissimilarities from ``samples`` to the training set."""
        if self.criteria is None or self.train_samples is None:
            raise InvalidInputError("model carries no criteria; pass dissimilarities directly")
        return cross_stack(samples, self.train_samples, self.criteria)


def train(
    stack: DissimilarityStack,
    sorter: str = "jensen",
    k: Sequence[int] | None = None,
    criteria: Sequence[Criterion] | None = None,
    train_samples: Sequence | None = None,
) -> PdaModel:
    if stack.N < 3:
        raise InvalidInputError("training needs N >= 3")
    if sorter not in SORTERS:
        raise InvalidInputError(f"unknown sorter {sorter!r}")
    if k is None:
        k = choose_k(stack)
    k = tuple(int(v) for v in k)
    if len(k) != stack.K or any(v < 1 or v > stack.N - 1 for v in k):
        raise InvalidInputError(f"need one k in [1, N-1] per criterion, got {k}")
    Y, _, _ = training_dyads(stack)
    ledger = SORTERS[sorter](Y)
    return PdaModel(stack, ledger, k, sorter, criteria, train_samples)


def fit(samples: Sequence, criteria: Sequence[Criterion], sorter: str = "jensen", k=None) -> PdaModel:
    """Compute the training stack from raw samples and train on it."""
    from .criteria import pairwise_stack

    stack = pairwise_stack(samples, criteria)
    return train(stack, sorter=sorter, k=k, criteria=criteria, train_samples=samples)


def _as_cross(model: PdaModel, T) -> np.ndarray:
    T = np.asarray(T, dtype=np.float64)
    if T.ndim == 2:
        T = T[:, None, :]
    if T.ndim != 3 or T.shape[0] != model.K or T.shape[2] != model.N:
        raise InvalidInputError(f"expected (K={model.K}, n, N={model.N}) dissimilarities, got {T.shape}")
    return T


def test_dyads(model: PdaModel, T, k: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Dyads between test samples and their per-criterion nearest neighbours.

    ``T`` is (K, N) for one sample or (K, n, N) for many. Returns dyads of
    shape (n, s, K) and the training index behind each dyad, (n, s). A
    training sample nearest under several criteria appears once per
    criterion.
    """
    T = _as_cross(model, T)
    k = model.k if k is None else tuple(k)
    K, n, N = T.shape
    idx = []
    for l in range(K):
        if not 1 <= k[l] <= N:
            raise InvalidInputError(f"k for criterion {l} out of range: {k[l]}")
        idx.append(np.argsort(T[l], axis=1, kind="stable")[:, : k[l]])
    nb = np.concatenate(idx, axis=1)
    dyads = np.stack([np.take_along_axis(T[l], nb, axis=1) for l in range(K)], axis=2)
    return dyads, nb


test_dyads.__test__ = False  # keep pytest from collecting the import


def score_many(model: PdaModel, T, mode: str = "exact", k: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean Pareto depth for each test sample; returns (scores, depths)."""
    dyads, _ = test_dyads(model, T, k)
    n, s, K = dyads.shape
    depths = model.ledger.depths(dyads.reshape(n * s, K), mode=mode).reshape(n, s)
    return depths.mean(axis=1), depths


def score(model: PdaModel, x=None, mode: str = "exact", dissimilarities=None) -> AnomalyScore:
    """Anomaly score of one test sample (raw sample or (K, N) dissimilarities)."""
    if dissimilarities is None:
        dissimilarities = model.to_train_dissimilarities([x])[:, 0, :]
    values, depths = score_many(model, np.asarray(dissimilarities)[:, None, :], mode=mode)
    return AnomalyScore(float(values[0]), depths[0], model.s)


def classify(score_value: float, rho: float) -> str:
    return "anomalous" if score_value > rho else "nominal"


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def save_model(model: PdaModel, directory) -> None:
    directory = Path(directory)
    write_stack(directory, model.stack, prefix="train")
    write_ledger_csv(directory / "ledger.csv", model.ledger)
    write_json(
        directory / "model.json",
        {
            "N": model.N,
            "K": model.K,
            "k": list(model.k),
            "M": model.M,
            "criteria": list(model.stack.names),
            "sorter": model.sorter,
        },
    )


def load_model(directory) -> PdaModel:
    directory = Path(directory)
    meta = json.loads((directory / "model.json").read_text())
    names, mats = read_stack_manifest(directory / "manifest.json", key="train")
    stack = DissimilarityStack(mats, tuple(names))
    if stack.N != meta["N"] or stack.K != meta["K"]:
        raise InvalidInputError("stored matrices disagree with model.json")
    Y, _, _ = training_dyads(stack)
    ledger = FrontLedger.from_depths(Y, read_ledger_depths(directory / "ledger.csv"))
    if ledger.M != meta["M"]:
        raise InvalidInputError("stored ledger disagrees with model.json")
    return PdaModel(stack, ledger, tuple(meta["k"]), meta.get("sorter", "jensen"))

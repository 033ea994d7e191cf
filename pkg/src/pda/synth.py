"""Seeded generators for the categorical mixture, uniform dyads and trajectories."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .criteria import Trajectory
from .io import atomic_writer
from .pareto import InvalidInputError


def group_probabilities(K: int, exact: bool = False):
    """p_i = i / (K(K+1)): proportional to i and summing to 1/2."""
    if K < 1:
        raise InvalidInputError("K must be >= 1")
    fr = [Fraction(i, K * (K + 1)) for i in range(1, K + 1)]
    return fr if exact else np.array([float(f) for f in fr])


@dataclass(frozen=True)
class CategoricalConfig:
    K: int = 6
    n_train: int = 400
    n_test: int = 400
    attrs_per_group: int = 20
    card_low: int = 6
    card_high: int = 10
    nominal_alpha1: float = 5.0
    anomaly_rate: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.K < 1 or self.attrs_per_group < 1:
            raise InvalidInputError("K and attrs_per_group must be >= 1")
        if not 2 <= self.card_low <= self.card_high:
            raise InvalidInputError("need 2 <= card_low <= card_high")
        if self.n_train < 3 or self.n_test < 1:
            raise InvalidInputError("need n_train >= 3 and n_test >= 1")
        if not 0.0 <= self.anomaly_rate <= 1.0:
            raise InvalidInputError("anomaly_rate must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class CategoricalDataset:
    """Samples are int arrays of shape (n, K, attrs); unused slots never occur."""

    cardinalities: np.ndarray
    train: np.ndarray
    test: np.ndarray
    labels: np.ndarray
    anomalous_group: np.ndarray = field(repr=False)


def _draw_values(rng, probs: list[np.ndarray], n: int) -> np.ndarray:
    u = rng.random((n, len(probs)))
    out = np.empty((n, len(probs)), dtype=np.int64)
    for j, p in enumerate(probs):
        cdf = np.cumsum(p)
        out[:, j] = np.minimum(np.searchsorted(cdf, u[:, j], side="right"), p.size - 1)
    return out


def gen_categorical_dataset(cfg: CategoricalConfig) -> CategoricalDataset:
    """One run of the grouped categorical mixture.

    Cardinalities and nominal parameters are drawn once and shared by the
    training set and the nominal test samples. Each anomalous test sample
    picks a group with probability proportional to its index and redraws
    that group's parameters from a flat Dirichlet for itself alone.
    """
    rng = np.random.default_rng(cfg.seed)
    K, A = cfg.K, cfg.attrs_per_group
    card = rng.integers(cfg.card_low, cfg.card_high + 1, size=(K, A))
    nominal = [
        [rng.dirichlet(np.r_[cfg.nominal_alpha1, np.ones(card[g, a] - 1)]) for a in range(A)] for g in range(K)
    ]

    def nominal_samples(n):
        return np.stack([_draw_values(rng, nominal[g], n) for g in range(K)], axis=1)

    train = nominal_samples(cfg.n_train)
    test = nominal_samples(cfg.n_test)

    # outcome K means nominal; scale the group weights to the anomaly rate
    p = group_probabilities(K) * (cfg.anomaly_rate / 0.5)
    choice = rng.choice(K + 1, size=cfg.n_test, p=np.r_[p, 1.0 - p.sum()])
    labels = choice < K
    for i in np.flatnonzero(labels):
        g = choice[i]
        fresh = [rng.dirichlet(np.ones(card[g, a])) for a in range(A)]
        test[i, g] = _draw_values(rng, fresh, 1)[0]
    group = np.where(labels, choice, -1)
    return CategoricalDataset(card, train, test, labels.astype(np.int64), group)


def write_categorical_csv(path, samples: np.ndarray, cardinalities: np.ndarray) -> None:
    """Long format ``sample_id,group,attr,value`` plus ``<stem>.cardinalities.json``."""
    path = Path(path)
    n, K, A = samples.shape
    with atomic_writer(path) as fh:
        fh.write("sample_id,group,attr,value\n")
        for s in range(n):
            for g in range(K):
                fh.write("".join(f"{s},{g},{a},{int(samples[s, g, a])}\n" for a in range(A)))
    with atomic_writer(path.with_suffix(".cardinalities.json")) as fh:
        json.dump({"cardinalities": np.asarray(cardinalities).tolist()}, fh)


def read_categorical_csv(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    card = np.array(json.loads(path.with_suffix(".cardinalities.json").read_text())["cardinalities"])
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    n = int(data[:, 0].max()) + 1
    out = np.full((n,) + card.shape, -1, dtype=np.int64)
    out[data[:, 0], data[:, 1], data[:, 2]] = data[:, 3]
    if np.any(out < 0) or np.any(out >= card[None]):
        raise InvalidInputError(f"{path}: missing or out-of-range categorical values")
    return out, card


def gen_uniform_points(n: int, d: int, seed) -> np.ndarray:
    if n < 1 or d < 1:
        raise InvalidInputError("n and d must be >= 1")
    return np.random.default_rng(seed).random((n, d))


def points_to_dyads(points) -> np.ndarray:
    """C(N,2) dyads of per-coordinate absolute differences, row-major pair order."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise InvalidInputError("need at least 2 points")
    i, j = np.triu_indices(X.shape[0], 1)
    return np.abs(X[i] - X[j])


@dataclass(frozen=True)
class TrajectoryConfig:
    """Scene of a few long straight traffic lanes crossing a region.

    Each trajectory is a 20-60 sample clip starting anywhere along its lane,
    shifted sideways by a per-trajectory offset.
    """

    n_flows: int = 4
    flow_length: float = 200.0
    lane_sigma: float = 1.0
    speed_mean: float = 1.0
    speed_sd: float = 0.1
    pos_sigma: float = 0.05
    heading_sigma: float = 0.03
    min_len: int = 20
    max_len: int = 60
    fast_factor: float = 3.0
    slow_factor: float = 0.25
    zigzag_amplitude: float = 1.5
    zigzag_period: int = 4


ANOMALY_KINDS = ("fast", "slow", "zigzag")


def _flows(cfg: TrajectoryConfig) -> tuple[np.ndarray, np.ndarray]:
    # fixed geometry: lane k enters on a circle and heads roughly across it
    ang = np.arange(cfg.n_flows) * (2 * np.pi / cfg.n_flows) + 0.3
    starts = 0.5 * cfg.flow_length * np.column_stack((np.cos(ang), np.sin(ang)))
    headings = ang + np.pi + np.linspace(-0.25, 0.25, cfg.n_flows)
    return starts, headings


def _one_trajectory(rng, cfg: TrajectoryConfig, kind: str | None) -> np.ndarray:
    starts, headings = _flows(cfg)
    f = rng.integers(cfg.n_flows)
    length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
    heading = headings[f] + rng.normal(0.0, cfg.heading_sigma)
    steps = np.abs(rng.normal(cfg.speed_mean, cfg.speed_sd, size=length - 1))
    if kind == "fast":
        steps *= cfg.fast_factor
    elif kind == "slow":
        steps *= cfg.slow_factor
    along = np.r_[0.0, np.cumsum(steps)]
    direction = np.array([np.cos(heading), np.sin(heading)])
    normal = np.array([-direction[1], direction[0]])
    lateral = np.full(length, rng.normal(0.0, cfg.lane_sigma))
    if kind == "zigzag":
        phase = (np.arange(length) // cfg.zigzag_period) % 2
        lateral += cfg.zigzag_amplitude * (2.0 * phase - 1.0)
    offset = rng.uniform(0.0, max(cfg.flow_length - along[-1], 0.0))
    start = starts[f] + offset * direction
    pts = start + along[:, None] * direction + lateral[:, None] * normal
    return pts + rng.normal(0.0, cfg.pos_sigma, size=pts.shape)


def gen_synthetic_trajectories(
    n_nominal: int, n_anomalous: int, seed, cfg: TrajectoryConfig | None = None
) -> tuple[list[Trajectory], np.ndarray, list[str]]:
    """Labelled trajectories: nominal first, then anomalies of a uniformly chosen kind.

    Returns (trajectories, labels, kinds) where kinds is "nominal" or one of
    :data:`ANOMALY_KINDS`.
    """
    if n_nominal < 0 or n_anomalous < 0:
        raise InvalidInputError("counts must be >= 0")
    cfg = cfg or TrajectoryConfig()
    rng = np.random.default_rng(seed)
    trajs, kinds = [], []
    for i in range(n_nominal):
        trajs.append(Trajectory(_one_trajectory(rng, cfg, None), f"n{i}"))
        kinds.append("nominal")
    for i in range(n_anomalous):
        kind = ANOMALY_KINDS[rng.integers(len(ANOMALY_KINDS))]
        trajs.append(Trajectory(_one_trajectory(rng, cfg, kind), f"a{i}"))
        kinds.append(kind)
    labels = np.r_[np.zeros(n_nominal, dtype=np.int64), np.ones(n_anomalous, dtype=np.int64)]
    return trajs, labels, kinds

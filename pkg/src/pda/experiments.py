"""Experiment drivers shared by the CLI, the scripts and the acceptance suite."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import baselines, detector
from .criteria import categorical_criteria, cross_stack, pairwise_stack, speed_edges, trajectory_criteria
from .evaluation import aggregate, auc, weight_profile
from .pareto import InvalidInputError
from .synth import CategoricalConfig, TrajectoryConfig, gen_categorical_dataset, gen_synthetic_trajectories


@dataclass(frozen=True, eq=False)
class RunResult:
    """One run: PDA AUC plus per-method AUCs for every weight."""

    pda_auc: float
    method_aucs: dict[str, np.ndarray]
    k: tuple[int, ...]
    M: int
    pda_scores: np.ndarray = field(repr=False)
    labels: np.ndarray = field(repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    def median(self, method: str) -> float:
        return float(np.median(self.method_aucs[method]))

    def best(self, method: str) -> float:
        return float(np.max(self.method_aucs[method]))


def _baseline_aucs(stack, T, weights, labels, k_base: int) -> dict[str, np.ndarray]:
    out = {m: np.empty(len(weights)) for m in baselines.METHODS}
    for wi, w in enumerate(weights):
        for m, s in baselines.baseline_scores(stack.matrices, T, w, k=k_base).items():
            out[m][wi] = auc(s, labels)
    return out


def categorical_run(
    cfg: CategoricalConfig,
    n_weights: int | None = None,
    k_base: int = 6,
    sorter: str = "jensen",
    mode: str = "exact",
) -> RunResult:
    """One run of the grouped categorical experiment."""
    ds = gen_categorical_dataset(cfg)
    crit = categorical_criteria(ds.cardinalities)
    stack = pairwise_stack(ds.train, crit)
    T = cross_stack(ds.test, ds.train, crit)
    model = detector.train(stack, sorter=sorter)
    scores, _ = detector.score_many(model, T, mode=mode)
    weights = baselines.sample_simplex_weights(cfg.K, n_weights or 100 * cfg.K, seed=[cfg.seed, 1])
    return RunResult(
        auc(scores, ds.labels),
        _baseline_aucs(stack, T, weights, ds.labels, k_base),
        model.k,
        model.M,
        scores,
        ds.labels,
    )


def run_seeds(seed: int, runs: int) -> list[int]:
    """Per-run seeds derived from a master seed by a counter."""
    ss = np.random.SeedSequence(seed)
    return [int(c.generate_state(1)[0]) for c in ss.spawn(runs)]


def summarize(results: list[RunResult]) -> dict:
    """Table-style summary: PDA mean/se and per-method median/best mean/se."""
    pda = aggregate([r.pda_auc for r in results])
    out = {"PDA": {"mean": pda.mean, "se": pda.se, "runs": pda.runs}}
    for m in baselines.METHODS:
        med = aggregate([r.median(m) for r in results])
        best = aggregate([r.best(m) for r in results])
        out[m] = {
            "median": med.mean,
            "median_se": med.se,
            "best": best.mean,
            "best_se": best.se,
            "mean": float(np.mean([r.method_aucs[m].mean() for r in results])),
            "se": aggregate([r.method_aucs[m].mean() for r in results]).se,
        }
    return out


def profiles(results: list[RunResult]) -> dict[str, np.ndarray]:
    """Per-method sorted AUC profile averaged over runs, rank by rank."""
    return {
        m: np.mean([weight_profile(m, None, r.method_aucs[m]).aucs for r in results], axis=0)
        for m in baselines.METHODS
    }


def categorical_experiment(
    K: int = 6,
    runs: int = 20,
    seed: int = 0,
    n_train: int = 400,
    n_test: int = 400,
    n_weights: int | None = None,
    sorter: str = "jensen",
    mode: str = "exact",
    progress=None,
) -> list[RunResult]:
    results = []
    for i, s in enumerate(run_seeds(seed, runs)):
        cfg = CategoricalConfig(K=K, n_train=n_train, n_test=n_test, seed=s)
        results.append(categorical_run(cfg, n_weights, sorter=sorter, mode=mode))
        if progress:
            progress(f"K={K} run {i + 1}/{runs}: PDA AUC {results[-1].pda_auc:.4f}")
    return results


@dataclass(frozen=True)
class KSweepRow:
    K: int
    pda: float
    pda_se: float
    best_lof: float
    best_lof_se: float
    ratio: float
    ratio_se: float


def k_sweep(Ks=range(2, 9), runs: int = 5, seed: int = 0, progress=None, **kw) -> list[KSweepRow]:
    """PDA AUC against the best-weight LOF AUC as the number of criteria grows."""
    rows = []
    for K in Ks:
        res = categorical_experiment(K=K, runs=runs, seed=seed + 1000 * K, progress=progress, **kw)
        pda = aggregate([r.pda_auc for r in res])
        lof = aggregate([r.best("lof") for r in res])
        ratio = aggregate([r.pda_auc / r.best("lof") for r in res])
        rows.append(KSweepRow(int(K), pda.mean, pda.se, lof.mean, lof.se, ratio.mean, ratio.se))
    return rows


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


def trajectory_run(
    train,
    test,
    labels,
    n_weights: int = 100,
    k_grid=range(1, 11),
    k_base: int = 6,
    bins: int = 20,
    sorter: str = "jensen",
) -> RunResult:
    """Two-criterion pipeline: speed-histogram KL and DTW shape."""
    edges = speed_edges(train, bins)
    crit = trajectory_criteria(edges)
    stack = pairwise_stack(train, crit)
    T = cross_stack(test, train, crit)
    model = detector.train(stack, sorter=sorter)
    scores, _ = detector.score_many(model, T)
    grid = {}
    for k1 in k_grid:
        for k2 in k_grid:
            s, _ = detector.score_many(model, T, k=(k1, k2))
            grid[(int(k1), int(k2))] = auc(s, labels)
    weights = baselines.grid_weights_2d(n_weights)
    return RunResult(
        auc(scores, labels),
        _baseline_aucs(stack, T, weights, labels, k_base),
        model.k,
        model.M,
        scores,
        np.asarray(labels),
        extra={"k_grid": grid},
    )


def trajectory_experiment(
    runs: int = 20,
    seed: int = 0,
    n_train: int = 500,
    n_nominal: int = 150,
    n_anomalous: int = 50,
    cfg: TrajectoryConfig | None = None,
    progress=None,
    **kw,
) -> list[RunResult]:
    results = []
    for i, s in enumerate(run_seeds(seed, runs)):
        train, _, _ = gen_synthetic_trajectories(n_train, 0, [s, 0], cfg)
        test, labels, _ = gen_synthetic_trajectories(n_nominal, n_anomalous, [s, 1], cfg)
        results.append(trajectory_run(train, test, labels, **kw))
        if progress:
            progress(f"trajectory run {i + 1}/{runs}: PDA AUC {results[-1].pda_auc:.4f} k={results[-1].k}")
    return results


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BenchResult:
    sorter: str
    K: int
    N: np.ndarray
    seconds: np.ndarray
    normalized: np.ndarray
    slope: float
    intercept: float


def loglog_fit(x, y) -> tuple[float, float]:
    """Least-squares fit of log y = a + b log x; returns (b, a)."""
    b, a = np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)
    return float(b), float(a)


def bench(sorter: str, N_grid, K: int = 2, repeats: int = 3, seed: int = 0) -> BenchResult:
    """Median wall-clock training time per N, normalised to the smallest N."""
    N_grid = np.asarray(sorted(int(n) for n in N_grid))
    if N_grid.size < 2 or N_grid[0] < 3:
        raise InvalidInputError("bench needs at least two grid points with N >= 3")
    # warm the compiled kernels so the first grid point is not charged for it
    warm = gen_categorical_dataset(CategoricalConfig(K=K, n_train=10, n_test=1, seed=seed))
    detector.train(pairwise_stack(warm.train, categorical_criteria(warm.cardinalities)), sorter=sorter)
    secs = []
    for N in N_grid:
        ds = gen_categorical_dataset(CategoricalConfig(K=K, n_train=int(N), n_test=1, seed=seed))
        crit = categorical_criteria(ds.cardinalities)
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            detector.train(pairwise_stack(ds.train, crit), sorter=sorter)
            times.append(time.perf_counter() - t0)
        secs.append(float(np.median(times)))
    secs = np.array(secs)
    slope, icpt = loglog_fit(N_grid, secs / secs[0])
    return BenchResult(sorter, K, N_grid, secs, secs / secs[0], slope, icpt)

"""Command-line entry point: ``pda <command> [options]``.

Every command writes under ``--out DIR``. Options may also come from a
``--config FILE`` of ``key = value`` lines; flags given on the command line
win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

log = logging.getLogger("pda")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: str | None = None
    seed: int | None = None
    threads: int | None = None
    sorter: str = "jensen"
    mode: str = "exact"
    k: tuple[int, ...] | None = None
    # detect
    train: str | None = None
    test: str | None = None
    criteria: str | None = None
    labels: str | None = None
    # simulate-categorical
    K: int = 6
    K_list: tuple[int, ...] | None = None
    n_train: int | None = None
    n_test: int = 400
    weights: int | None = None
    runs: int | None = None
    k_base: int = 6
    # gap
    d: int = 2
    d_list: tuple[int, ...] | None = None
    n_grid: tuple[int, ...] | None = None
    realizations: int = 100
    generator: str = "dyads"
    sweep_N: int = 448
    # bench
    k_grid: tuple[int, ...] | None = None
    repeats: int = 3
    # trajectories
    input: str | None = None
    synthetic: bool = False
    n_nominal: int = 150
    n_anomalous: int = 50
    bins: int = 20
    k_max: int = 10


_FIELDS = {f.name: f for f in fields(RunConfig)}
_TUPLES = {"k", "K_list", "d_list", "n_grid", "k_grid"}
_INTS = {"seed", "threads", "K", "n_train", "n_test", "weights", "runs", "k_base", "d", "realizations",
         "sweep_N", "repeats", "n_nominal", "n_anomalous", "bins", "k_max"}
_CHOICES = {"sorter": ("deb", "jensen"), "mode": ("exact", "accelerated"), "generator": ("dyads", "uniform")}

_DEFAULTS = {
    "simulate-categorical": {"n_train": 400, "runs": 20},
    "trajectories": {"n_train": 500, "runs": 20, "weights": 100},
    "gap": {"n_grid": (10_000, 31_623, 100_000, 316_228, 1_000_000)},
    "bench": {"n_grid": (100, 200, 400, 800), "k_grid": (2,)},
}
_NEEDS_SEED = {"simulate-categorical", "gap", "bench"}


def _key(name: str) -> str:
    k = name.strip().replace("-", "_")
    low = {f.lower(): f for f in _FIELDS}
    return k if k in _FIELDS else low.get(k.lower(), k)


def _convert(key: str, raw):
    if raw is None or not isinstance(raw, str):
        return raw
    try:
        if key in _TUPLES:
            return tuple(int(float(v)) for v in raw.replace(";", ",").split(",") if v.strip())
        if key in _INTS:
            return int(raw)
        if key == "synthetic":
            if raw.lower() not in ("1", "0", "true", "false", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("1", "true", "yes")
    except ValueError:
        raise UsageError(f"bad value for {key!r}: {raw!r}") from None
    return raw


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {line!r}")
        name, value = line.split("=", 1)
        key = _key(name)
        if key not in _FIELDS or key == "command":
            raise UsageError(f"{path}:{lineno}: unknown key {name.strip()!r}")
        out[key] = _convert(key, value.strip())
    return out


def _validate(cfg: RunConfig) -> RunConfig:
    for key in _INTS:
        v = getattr(cfg, key)
        if v is not None and v < (0 if key == "seed" else 1):
            raise UsageError(f"{key} must be {'>= 0' if key == 'seed' else 'positive'}, got {v}")
    for key in _TUPLES:
        v = getattr(cfg, key)
        if v is not None and (not v or min(v) < 1):
            raise UsageError(f"{key} must be a nonempty list of positive integers")
    for key, allowed in _CHOICES.items():
        if getattr(cfg, key) not in allowed:
            raise UsageError(f"{key} must be one of {allowed}, got {getattr(cfg, key)!r}")
    stochastic = cfg.command in _NEEDS_SEED or (cfg.command == "trajectories" and cfg.synthetic)
    if stochastic and cfg.seed is None:
        raise UsageError(f"{cfg.command} needs --seed")
    if cfg.out is None:
        raise UsageError("--out DIR is required")
    return cfg


def parse_config(command: str, flags: dict, config_file=None) -> RunConfig:
    """Merge command defaults, then the config file, then explicit flags."""
    values = dict(_DEFAULTS.get(command, {}))
    if config_file:
        values.update(read_config_file(config_file))
    for name, raw in flags.items():
        key = _key(name)
        if key not in _FIELDS:
            raise UsageError(f"unknown option {name!r}")
        values[key] = _convert(key, raw)
    return _validate(replace(RunConfig(command), **values))


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pda", description="Pareto depth analysis toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    def common(sp, seed=True):
        sp.add_argument("--out", default=S, help="output directory")
        sp.add_argument("--config", default=None, help="key = value configuration file")
        sp.add_argument("--threads", default=S, help="worker threads for compiled kernels")
        sp.add_argument("--sorter", default=S, help="deb or jensen (default jensen)")
        sp.add_argument("--mode", default=S, help="depth mode: exact or accelerated")
        if seed:
            sp.add_argument("--seed", default=S)

    d = sub.add_parser("detect", help="train on dissimilarities and score a test set")
    common(d, seed=False)
    d.add_argument("--train", default=S, help="training samples (vectors or trajectories CSV)")
    d.add_argument("--test", default=S, help="test samples, same format as --train")
    d.add_argument("--criteria", default=S,
                   help="matrix manifest (.json) or a builtin: coordinates, euclidean, trajectory")
    d.add_argument("--labels", default=S, help="optional test labels CSV (sample_id,label)")
    d.add_argument("--k", default=S, help="comma-separated k per criterion (default: heuristic)")

    c = sub.add_parser("simulate-categorical", help="grouped categorical experiment")
    common(c)
    for flag in ("--K", "--K-list", "--n-train", "--n-test", "--weights", "--runs", "--k-base"):
        c.add_argument(flag, default=S)

    g = sub.add_parser("gap", help="scalarisation gap Monte Carlo")
    common(g)
    for flag in ("--d", "--d-list", "--n-grid", "--realizations", "--generator", "--sweep-N"):
        g.add_argument(flag, default=S)

    b = sub.add_parser("bench", help="training-time scaling benchmark")
    common(b)
    for flag in ("--n-grid", "--k-grid", "--repeats"):
        b.add_argument(flag, default=S)

    t = sub.add_parser("trajectories", help="speed/shape trajectory experiment")
    common(t)
    t.add_argument("--input", default=S, help="trajectories CSV (traj_id,t,x,y)")
    t.add_argument("--labels", default=S, help="traj_id,label for test trajectories; unlabelled ones train")
    t.add_argument("--synthetic", action="store_const", const="true", default=S)
    for flag in ("--n-train", "--n-nominal", "--n-anomalous", "--weights", "--runs", "--bins", "--k-max"):
        t.add_argument(flag, default=S)
    return p


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_labels(path) -> dict[str, int]:
    out = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if len(header) < 2:
            raise UsageError(f"{path}: expected header id,label")
        for line in fh:
            if line.strip():
                sid, lab = line.strip().split(",")[:2]
                out[sid] = 1 if lab.strip().lower() in ("1", "anomalous", "true") else 0
    return out


def _load_detect_inputs(cfg: RunConfig):
    from .criteria import (
        EUCLIDEAN,
        DissimilarityStack,
        coordinate_criteria,
        cross_stack,
        pairwise_stack,
        read_stack_manifest,
        read_trajectories_csv,
        speed_edges,
        trajectory_criteria,
    )

    if cfg.criteria is None:
        raise UsageError("detect needs --criteria")
    if cfg.criteria.endswith(".json"):
        names, train = read_stack_manifest(cfg.criteria, key="train")
        _, test = read_stack_manifest(cfg.criteria, key="test")
        n = test.shape[1]
        return DissimilarityStack(train, tuple(names)), test, [str(i) for i in range(n)]
    if cfg.train is None or cfg.test is None:
        raise UsageError("builtin criteria need --train and --test")
    if cfg.criteria == "trajectory":
        tr = list(read_trajectories_csv(cfg.train).values())
        te_map = read_trajectories_csv(cfg.test)
        crit = trajectory_criteria(speed_edges(tr, cfg.bins))
        te, ids = list(te_map.values()), [str(i) for i in te_map]
    elif cfg.criteria in ("coordinates", "euclidean"):
        tr = np.loadtxt(cfg.train, delimiter=",", ndmin=2)
        te = np.loadtxt(cfg.test, delimiter=",", ndmin=2)
        crit = coordinate_criteria(tr.shape[1]) if cfg.criteria == "coordinates" else [EUCLIDEAN]
        ids = [str(i) for i in range(te.shape[0])]
    else:
        raise UsageError(f"unknown criteria {cfg.criteria!r}")
    return pairwise_stack(tr, crit), cross_stack(te, tr, crit), ids


def cmd_detect(cfg: RunConfig) -> None:
    from . import detector
    from .evaluation import auc, roc_curve, write_roc_csv
    from .io import write_json, write_rows

    stack, T, ids = _load_detect_inputs(cfg)
    model = detector.train(stack, sorter=cfg.sorter, k=cfg.k)
    scores, _ = detector.score_many(model, T, mode=cfg.mode)
    out = _outdir(cfg)
    summary = {"N": model.N, "K": model.K, "k": list(model.k), "M": model.M, "s": model.s,
               "criteria": list(stack.names), "sorter": cfg.sorter, "mode": cfg.mode}
    labels = None
    if cfg.labels:
        lab = _read_labels(cfg.labels)
        labels = np.array([lab.get(i, 0) for i in ids])
        summary["auc"] = auc(scores, labels)
        write_roc_csv(out / "roc.csv", roc_curve(scores, labels))
    rows = [(i, float(s)) + ((int(labels[j]),) if labels is not None else ()) for j, (i, s) in enumerate(zip(ids, scores))]
    write_rows(out / "scores.csv", ["sample_id", "score"] + (["label"] if labels is not None else []), rows)
    write_json(out / "summary.json", summary)
    detector.save_model(model, out / "model")


def _write_experiment(out: Path, results, extra: dict | None = None) -> dict:
    from .evaluation import roc_curve, write_profile_csv, write_roc_csv, write_summary_json
    from .experiments import profiles, summarize
    from .io import write_rows

    summary = summarize(results)
    if extra:
        summary.update(extra)
    write_summary_json(out / "summary.json", summary)
    write_profile_csv(out / "auc_profile.csv", profiles(results))
    write_roc_csv(out / "roc.csv", roc_curve(results[0].pda_scores, results[0].labels))
    methods = list(results[0].method_aucs)
    write_rows(
        out / "runs.csv",
        ["run", "pda_auc"] + [f"{m}_{s}" for m in methods for s in ("median", "best")],
        [[i, r.pda_auc] + [v for m in methods for v in (r.median(m), r.best(m))] for i, r in enumerate(results)],
    )
    return summary


def cmd_simulate_categorical(cfg: RunConfig) -> None:
    from .experiments import categorical_experiment, k_sweep
    from .io import write_rows

    out = _outdir(cfg)
    kw = dict(n_train=cfg.n_train, n_test=cfg.n_test, n_weights=cfg.weights, sorter=cfg.sorter, mode=cfg.mode)
    if cfg.K_list:
        rows = k_sweep(cfg.K_list, runs=cfg.runs, seed=cfg.seed, progress=log.info, **kw)
        write_rows(
            out / "k_sweep.csv",
            ["K", "pda_auc", "pda_se", "best_lof_auc", "best_lof_se", "ratio", "ratio_se"],
            [(r.K, r.pda, r.pda_se, r.best_lof, r.best_lof_se, r.ratio, r.ratio_se) for r in rows],
        )
        return
    results = categorical_experiment(K=cfg.K, runs=cfg.runs, seed=cfg.seed, progress=log.info, **kw)
    _write_experiment(out, results, {"config": {"K": cfg.K, "runs": cfg.runs, "seed": cfg.seed,
                                                "n_train": cfg.n_train, "n_test": cfg.n_test,
                                                "weights": cfg.weights or 100 * cfg.K}})


def cmd_gap(cfg: RunConfig) -> None:
    from .gap import run_dimension_sweep, run_gap_experiment, write_dimension_csv, write_gap_csv
    from .io import write_json

    out = _outdir(cfg)
    info = {}
    if cfg.d_list:
        sweep = run_dimension_sweep(cfg.d_list, N=cfg.sweep_N, realizations=cfg.realizations, seed=cfg.seed)
        write_dimension_csv(out / "gap_dimension.csv", sweep)
        info["dimension_sweep"] = {"n": sweep.n, "ambiguous": sweep.ambiguous}
    else:
        s = run_gap_experiment(cfg.n_grid, d=cfg.d, realizations=cfg.realizations, generator=cfg.generator, seed=cfg.seed)
        write_gap_csv(out / "gap_n.csv", s)
        info.update(s.alpha_fits())
        info["ambiguous"] = s.ambiguous
    info.update({"d": cfg.d, "realizations": cfg.realizations, "seed": cfg.seed, "generator": cfg.generator})
    write_json(out / "gap_summary.json", info)


def cmd_bench(cfg: RunConfig) -> None:
    from .experiments import bench
    from .io import write_json, write_rows

    out = _outdir(cfg)
    rows, fits = [], {}
    for K in cfg.k_grid:
        r = bench(cfg.sorter, cfg.n_grid, K=K, repeats=cfg.repeats, seed=cfg.seed)
        rows.extend((cfg.sorter, K, int(n), float(s), float(z)) for n, s, z in zip(r.N, r.seconds, r.normalized))
        fits[str(K)] = {"slope": r.slope, "intercept": r.intercept}
        log.info("%s K=%d slope %.3f", cfg.sorter, K, r.slope)
    write_rows(out / "bench.csv", ["sorter", "K", "N", "seconds", "normalized"], rows)
    write_json(out / "bench_fit.json", {"sorter": cfg.sorter, "fits": fits})


def cmd_trajectories(cfg: RunConfig) -> None:
    from .criteria import read_trajectories_csv
    from .experiments import trajectory_experiment, trajectory_run
    from .io import write_rows

    out = _outdir(cfg)
    kw = dict(n_weights=cfg.weights, k_grid=range(1, cfg.k_max + 1), k_base=cfg.k_base, bins=cfg.bins, sorter=cfg.sorter)
    if cfg.synthetic:
        results = trajectory_experiment(runs=cfg.runs, seed=cfg.seed, n_train=cfg.n_train,
                                        n_nominal=cfg.n_nominal, n_anomalous=cfg.n_anomalous,
                                        progress=log.info, **kw)
    else:
        if not cfg.input or not cfg.labels:
            raise UsageError("trajectories needs --synthetic or --input with --labels")
        trajs = read_trajectories_csv(cfg.input)
        lab = _read_labels(cfg.labels)
        train = [t for i, t in trajs.items() if str(i) not in lab]
        test_ids = [i for i in trajs if str(i) in lab]
        if len(train) < 3 or not test_ids:
            raise UsageError("need at least 3 unlabelled training and 1 labelled test trajectory")
        labels = np.array([lab[str(i)] for i in test_ids])
        results = [trajectory_run(train, [trajs[i] for i in test_ids], labels, **kw)]
    grid_keys = sorted(results[0].extra["k_grid"])
    write_rows(out / "k_grid.csv", ["k1", "k2", "auc"],
               [(a, b, float(np.mean([r.extra["k_grid"][(a, b)] for r in results]))) for a, b in grid_keys])
    _write_experiment(out, results, {"k_heuristic": [list(r.k) for r in results]})


COMMANDS = {
    "detect": cmd_detect,
    "simulate-categorical": cmd_simulate_categorical,
    "gap": cmd_gap,
    "bench": cmd_bench,
    "trajectories": cmd_trajectories,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        ns = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    flags = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    try:
        cfg = parse_config(ns.command, flags, ns.config)
    except UsageError as exc:
        print(f"pda {ns.command}: usage error: {exc}", file=sys.stderr)
        return 2
    if cfg.threads:
        import numba

        numba.set_num_threads(min(cfg.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"pda {cfg.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"pda {cfg.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

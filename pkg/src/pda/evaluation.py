"""ROC curves, AUC and cross-run aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .io import write_json, write_rows
from .pareto import InvalidInputError


def _split(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    if s.shape != y.shape:
        raise InvalidInputError("one label per score required")
    if y.all() or not y.any():
        raise InvalidInputError("AUC needs both nominal and anomalous samples")
    return s, y


def auc(scores, labels) -> float:
    """P(anomalous > nominal) + P(tie)/2 via the Mann-Whitney rank sum.

    ``labels`` are truthy for anomalous samples.
    """
    s, y = _split(scores, labels)
    r = rankdata(s)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    return float((r[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray

    def area(self) -> float:
        return float(np.trapezoid(self.tpr, self.fpr))


def roc_curve(scores, labels) -> RocCurve:
    """ROC with one vertex per distinct score; ties give diagonal segments."""
    s, y = _split(scores, labels)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[last]
    fp = np.cumsum(~y)[last]
    tpr = np.r_[0.0, tp / y.sum()]
    fpr = np.r_[0.0, fp / (~y).sum()]
    return RocCurve(fpr, tpr)


@dataclass(frozen=True)
class AucStat:
    mean: float
    se: float
    runs: int


def aggregate(per_run_aucs) -> AucStat:
    """Mean and standard error (population std over sqrt(runs))."""
    a = np.asarray(per_run_aucs, dtype=np.float64)
    if a.size < 1:
        raise InvalidInputError("need at least one run")
    return AucStat(float(a.mean()), float(a.std() / np.sqrt(a.size)), int(a.size))


@dataclass(frozen=True)
class WeightProfile:
    method: str
    aucs: np.ndarray
    median: float
    best: float


def weight_profile(method: str, weights, aucs) -> WeightProfile:
    """AUCs over weights sorted worst to best."""
    a = np.asarray(aucs, dtype=np.float64)
    if weights is not None and len(weights) != a.size:
        raise InvalidInputError("one AUC per weight required")
    a = np.sort(a)
    return WeightProfile(method, a, float(np.median(a)), float(a[-1]))


def write_roc_csv(path, curve: RocCurve) -> None:
    write_rows(path, ["fpr", "tpr"], zip(curve.fpr.tolist(), curve.tpr.tolist()))


def write_profile_csv(path, profiles: dict[str, np.ndarray]) -> None:
    """``method,weight_rank,auc``; profiles are sorted AUC arrays."""
    rows = []
    for method, aucs in profiles.items():
        rows.extend((method, r, float(a)) for r, a in enumerate(np.asarray(aucs)))
    write_rows(path, ["method", "weight_rank", "auc"], rows)


def write_summary_json(path, summary: dict) -> None:
    write_json(path, summary)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pda.evaluation import (
    aggregate,
    auc,
    roc_curve,
    weight_profile,
    write_profile_csv,
    write_roc_csv,
)
from pda.pareto import InvalidInputError


def test_auc_examples():
    assert auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0
    assert auc([1, 2, 2, 3], [0, 0, 1, 1]) == pytest.approx(0.875)
    with pytest.raises(InvalidInputError):
        auc([1, 2], [1, 1])


def test_auc_null(rng):
    s = rng.random(10_000)
    y = rng.integers(0, 2, 10_000)
    assert auc(s, y) == pytest.approx(0.5, abs=0.02)


def _pairs_auc(s, y):
    pos, neg = s[y == 1], s[y == 0]
    diff = pos[:, None] - neg[None, :]
    return ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size


fixtures = st.integers(2, 60).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.sampled_from([0.0, 1.0, 1.5, 2.0, 7.0]) | st.floats(-3, 3)),
        arrays(np.int64, n, elements=st.integers(0, 1)),
    )
).filter(lambda t: 0 < t[1].sum() < t[1].size)


@given(fixtures)
def test_auc_properties(fx):
    s, y = fx
    a = auc(s, y)
    assert a == pytest.approx(_pairs_auc(s, y), abs=1e-12)
    curve = roc_curve(s, y)
    assert curve.area() == pytest.approx(a, abs=1e-12)
    assert curve.fpr[0] == 0 and curve.tpr[0] == 0 and curve.fpr[-1] == 1 and curve.tpr[-1] == 1
    assert np.all(np.diff(curve.fpr) >= 0) and np.all(np.diff(curve.tpr) >= 0)
    assert auc(2.0 * s + 5.0, y) == pytest.approx(a, abs=1e-12) or np.unique(s).size != np.unique(2.0 * s + 5.0).size
    assert auc(s, 1 - y) == pytest.approx(1 - a, abs=1e-12)


def test_aggregate_examples():
    a = aggregate([0.8, 0.9])
    assert a.mean == pytest.approx(0.85) and a.se == pytest.approx(0.0354, abs=1e-4)
    assert aggregate([0.7, 0.7, 0.7]).se == pytest.approx(0, abs=1e-15)
    with pytest.raises(InvalidInputError):
        aggregate([])


def test_weight_profile():
    p = weight_profile("knn", [0, 1, 2], [0.7, 0.9, 0.8])
    assert p.median == pytest.approx(0.8) and p.best == pytest.approx(0.9)
    assert p.aucs.tolist() == [0.7, 0.8, 0.9]


def test_writers(tmp_path):
    write_roc_csv(tmp_path / "roc.csv", roc_curve([1, 2, 3], [0, 1, 1]))
    assert (tmp_path / "roc.csv").read_text().splitlines()[0] == "fpr,tpr"
    write_profile_csv(tmp_path / "p.csv", {"lof": np.array([0.6, 0.7])})
    assert (tmp_path / "p.csv").read_text().splitlines() == ["method,weight_rank,auc", "lof,0,0.6", "lof,1,0.7"]

import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from pda.gap import (
    c_nd,
    dyad_count_to_points,
    expected_kn_uniform,
    first_front,
    first_front_size,
    gap_bounds,
    harmonic,
    run_dimension_sweep,
    run_gap_experiment,
    sample_linear_density,
    scalarizable_subset,
    write_dimension_csv,
    write_gap_csv,
)
from pda.pareto import InvalidInputError


def test_first_front_size_examples():
    assert first_front_size([(1, 5), (2, 3), (4, 1), (3, 4), (5, 5)]) == 3
    assert first_front_size([(0.3, 0.9)]) == 1
    x = np.linspace(0, 1, 17)
    assert first_front_size(np.column_stack((x, 1 - x))) == 17


@pytest.mark.parametrize("method", ["lp", "chain", "auto"])
def test_scalarizable_examples(method):
    r = scalarizable_subset([(1, 5), (2, 3), (4, 1)], method)
    assert r.mask.tolist() == [True, True, True]
    r = scalarizable_subset([(1, 5), (3, 4.5), (4, 1)], method)
    assert r.mask.tolist() == [True, False, True]
    assert r.K_n - r.L_n == 1


def test_collinear_points_are_reachable():
    # the middle point lies on the segment: tied minimiser counts as reachable
    for method in ("lp", "chain"):
        assert scalarizable_subset([(0, 2), (1, 1), (2, 0)], method).mask.all()


def test_scalarizable_rejects_dominated_input():
    with pytest.raises(InvalidInputError):
        scalarizable_subset([(1, 1), (2, 2)])
    with pytest.raises(InvalidInputError):
        scalarizable_subset(np.random.default_rng(0).random((5, 3)) * 0 + [[0, 1, 2]], "chain")


def _reachable_oracle(F, i):
    """Feasibility of alpha on the simplex with alpha . (y - x) >= 0 for all front y."""
    m, d = F.shape
    A = -(F - F[i])
    res = linprog(np.zeros(d), A_ub=A, b_ub=np.zeros(m), A_eq=np.ones((1, d)), b_eq=[1.0],
                  bounds=[(0, None)] * d, method="highs")
    return res.status == 0


@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(5, 300))
def test_lp_matches_independent_solver(seed, d, n):
    rng = np.random.default_rng(seed)
    F = first_front(rng.random((n, d)))
    r = scalarizable_subset(F, "lp")
    for i in range(len(F)):
        if not r.ambiguous[i]:
            assert r.mask[i] == _reachable_oracle(F, i)


def test_coordinate_minimisers_always_reachable(rng):
    F = first_front(rng.random((400, 3)))
    r = scalarizable_subset(F, "lp")
    for l in range(3):
        assert r.mask[np.argmin(F[:, l])]
    assert 1 <= r.L_n <= r.K_n


def test_lp_and_chain_agree(rng):
    flagged = 0
    for _ in range(100):
        F = first_front(rng.random((int(rng.integers(5, 2000)), 2)))
        a = scalarizable_subset(F, "lp")
        b = scalarizable_subset(F, "chain")
        ok = ~(a.ambiguous | b.ambiguous)
        flagged += int((~ok).sum())
        assert np.array_equal(a.mask[ok], b.mask[ok])
    assert flagged == 0


def test_c_nd_examples():
    assert c_nd(100, 2) == pytest.approx(4.6052, abs=1e-4)
    assert c_nd(100, 3) == pytest.approx(10.604, abs=1e-3)
    assert c_nd(12345, 1) == 1.0


def test_expected_kn_uniform_harmonic():
    assert expected_kn_uniform(10, 2) == pytest.approx(2.92897, abs=1e-5)
    assert expected_kn_uniform(10, 2) == pytest.approx(harmonic(10), rel=1e-9)
    assert expected_kn_uniform(1000, 2) == pytest.approx(7.48547, abs=1e-5)
    assert expected_kn_uniform(57, 1) == 1.0


def test_expected_kn_small_n_brute_force():
    # n = 2 in d dims: both points are on the front unless one dominates the other
    for d in (2, 3, 4):
        assert expected_kn_uniform(2, d) == pytest.approx(2 - 2 * 0.5**d, rel=1e-9)


def test_dyad_count_to_points():
    assert dyad_count_to_points(100_128) == 448
    for n in (3, 10, 11, 1000, 10**6):
        N = dyad_count_to_points(n)
        assert N * (N - 1) // 2 >= n > (N - 1) * (N - 2) // 2


def test_linear_density_sampler(rng):
    P = sample_linear_density(200_000, rng)
    assert P.shape == (200_000, 2) and P.min() >= 0 and P.max() <= 1
    # E[x] = (1/2)(1/2 + 1/3 + 1/4) = 13/24 under density (1+x+y)/2
    assert P[:, 0].mean() == pytest.approx(13 / 24, abs=0.005)


def test_gap_experiment_small_and_deterministic(tmp_path):
    a = run_gap_experiment([100, 1000], d=2, realizations=8, seed=3)
    b = run_gap_experiment([100, 1000], d=2, realizations=8, seed=3)
    assert np.array_equal(a.mean_gap, b.mean_gap)
    assert a.n.tolist() == [105, 1035]
    assert np.all(a.mean_gap >= 0) and np.all(a.se_gap >= 0)
    assert np.all(a.mean_L <= a.mean_K)
    fits = a.alpha_fits()
    assert fits["alpha"] == pytest.approx(np.mean(a.mean_gap / np.log(a.n)))
    write_gap_csv(tmp_path / "g.csv", a)
    assert (tmp_path / "g.csv").read_text().splitlines()[0] == "n,mean_gap,se,realizations"
    u = run_gap_experiment([50, 200], d=3, realizations=4, generator="uniform", seed=1)
    assert u.n.tolist() == [50, 200]
    with pytest.raises(InvalidInputError):
        run_gap_experiment([100, 50], realizations=2)


def test_dimension_sweep_small(tmp_path):
    s = run_dimension_sweep((2, 3), N=40, realizations=3, seed=0)
    assert s.n == 780 and np.all(s.mean_ratio >= 0)
    write_dimension_csv(tmp_path / "d.csv", s)
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "d,mean_ratio,se,lower_bound,upper_bound"
    assert lines[1].endswith(f"{1 / 6!r},{0.5!r}")


def test_gap_bounds():
    assert gap_bounds(2) == (pytest.approx(1 / 6), pytest.approx(0.5))
    lo, hi = gap_bounds(3)
    assert lo == pytest.approx(0.2) and hi == pytest.approx(1 - 6 / 27)

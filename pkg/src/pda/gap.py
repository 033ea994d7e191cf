"""Monte Carlo lab for first-front sizes and the linear-scalarisation gap.

K_n counts the non-dominated points of a sample and L_n counts the front
points that minimise some nonnegative weighted sum of the coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy import integrate

from .io import write_rows
from .pareto import InvalidInputError, first_front_mask
from .synth import points_to_dyads

SCALARIZABLE_TOL = 1e-12
NOT_SCALARIZABLE_TOL = 1e-9
_PIVOT_EPS = 1e-12


def first_front_size(points) -> int:
    return int(first_front_mask(points).sum())


def first_front(points) -> np.ndarray:
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return X[first_front_mask(X)]


@nb.njit(cache=True)
def _lp_gap(F, x, stop_at):
    """Largest u >= 0 with some convex combination of F below F[x] - u in every coordinate.

    The tableau has d inequality rows plus the simplex row. The basis
    {slacks, lambda_x} is feasible from the start, so no phase-1 auxiliary
    problem is needed. Bland's rule prevents cycling on the degenerate start.
    Returns early once the objective exceeds ``stop_at``.
    """
    n, d = F.shape
    u_col = n
    rhs = n + 1 + d
    T = np.zeros((d + 1, rhs + 1))
    for l in range(d):
        for i in range(n):
            T[l, i] = F[i, l] - F[x, l]
        T[l, u_col] = 1.0
        T[l, n + 1 + l] = 1.0
    for i in range(n):
        T[d, i] = 1.0
    T[d, rhs] = 1.0
    z = np.zeros(rhs + 1)
    z[u_col] = -1.0
    basis = np.empty(d + 1, dtype=np.int64)
    for l in range(d):
        basis[l] = n + 1 + l
    basis[d] = x
    for _ in range(100000):
        enter = -1
        for j in range(rhs):
            if z[j] < -_PIVOT_EPS:
                enter = j
                break
        if enter < 0:
            return z[rhs]
        leave = -1
        best = np.inf
        for r in range(d + 1):
            a = T[r, enter]
            if a > _PIVOT_EPS:
                ratio = T[r, rhs] / a
                if ratio < best - 1e-15 or (abs(ratio - best) <= 1e-15 and basis[r] < basis[leave]):
                    best = ratio
                    leave = r
        if leave < 0:
            return np.inf
        piv = T[leave, enter]
        for c in range(rhs + 1):
            T[leave, c] /= piv
        for r in range(d + 1):
            if r != leave:
                f = T[r, enter]
                if f != 0.0:
                    for c in range(rhs + 1):
                        T[r, c] -= f * T[leave, c]
        f = z[enter]
        for c in range(rhs + 1):
            z[c] -= f * T[leave, c]
        basis[leave] = enter
        if z[rhs] > stop_at:
            return z[rhs]
    return np.nan


@dataclass(frozen=True, eq=False)
class ScalarizableResult:
    """``mask[i]``: front point i is reachable by some simplex weight."""

    mask: np.ndarray
    ambiguous: np.ndarray
    method: str

    @property
    def L_n(self) -> int:
        return int(self.mask.sum())

    @property
    def K_n(self) -> int:
        return int(self.mask.size)


def _lp_classify(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m, d = U.shape
    mask = np.zeros(m, dtype=bool)
    amb = np.zeros(m, dtype=bool)
    # the minimiser of any single coordinate is trivially reachable
    easy = np.zeros(m, dtype=bool)
    for l in range(d):
        col = U[:, l]
        easy |= col == col.min()
    F = np.ascontiguousarray(U)
    for i in range(m):
        if easy[i]:
            mask[i] = True
            continue
        u = _lp_gap(F, i, NOT_SCALARIZABLE_TOL)
        if not np.isfinite(u):
            raise RuntimeError(f"simplex failed on candidate {i} (value {u})")
        if u <= SCALARIZABLE_TOL:
            mask[i] = True
        elif u <= NOT_SCALARIZABLE_TOL:
            amb[i] = True
    return mask, amb


def _chain_classify(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # U is lexicographically sorted and duplicate free, so x strictly increases
    # and y strictly decreases along a 2D front
    m = U.shape[0]
    on = np.zeros(m, dtype=bool)
    amb = np.zeros(m, dtype=bool)
    hull: list[int] = []
    for p in range(m):
        while len(hull) >= 2:
            o, a = U[hull[-2]], U[hull[-1]]
            ax, ay = a[0] - o[0], a[1] - o[1]
            px, py = U[p, 0] - o[0], U[p, 1] - o[1]
            cr = ax * py - ay * px
            scale = math.hypot(ax, ay) * math.hypot(px, py)
            if abs(cr) <= SCALARIZABLE_TOL * scale:
                amb[hull[-1]] = True
                break
            if cr < 0:
                hull.pop()
            else:
                break
        hull.append(p)
    on[hull] = True
    return on, amb


def scalarizable_subset(front, method: str = "auto") -> ScalarizableResult:
    """Classify each front point as reachable by linear scalarisation or not.

    ``method`` is "lp", "chain" (d = 2 only) or "auto" (chain for d = 2,
    LP otherwise). Ties count as reachable. Under "auto" with d = 2 an LP
    is not run at all; under "lp" with d = 2, ambiguous LP verdicts are
    settled by the chain. For d > 2 ambiguous points count as unreachable.
    """
    X = np.asarray(front, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidInputError("front must be a nonempty (m, d) array")
    d = X.shape[1]
    U, inv = np.unique(X, axis=0, return_inverse=True)
    inv = inv.ravel()
    if first_front_mask(U).sum() != U.shape[0]:
        raise InvalidInputError("input contains dominated points; pass the first front")
    if method == "auto":
        method = "chain" if d == 2 else "lp"
    if method == "chain":
        if d != 2:
            raise InvalidInputError("the convex chain route needs d = 2")
        mask, amb = _chain_classify(U)
    elif method == "lp":
        mask, amb = _lp_classify(U)
        if d == 2 and amb.any():
            cm, _ = _chain_classify(U)
            mask = np.where(amb, cm, mask)
    else:
        raise InvalidInputError(f"unknown method {method!r}")
    return ScalarizableResult(mask[inv], amb[inv], method)


def c_nd(n, d: int) -> float:
    """(ln n)^(d-1) / (d-1)!"""
    if n < 2 or d < 1:
        raise InvalidInputError("need n >= 2 and d >= 1")
    return math.log(n) ** (d - 1) / math.factorial(d - 1)


class QuadratureError(RuntimeError):
    pass


def expected_kn_uniform(n: int, d: int, rtol: float = 1e-9) -> float:
    """E(K_n) for n i.i.d. uniform points in the unit d-cube, by quadrature.

    Uses x = exp(-t), turning the integrand into
    (1 - e^-t)^(n-1) t^(d-1) e^-t on [0, inf), which peaks near t = ln n.
    """
    if n < 1 or d < 1:
        raise InvalidInputError("need n >= 1 and d >= 1")
    if d == 1 or n == 1:
        return 1.0

    def f(t):
        if t == 0.0:
            return 0.0
        return math.exp((n - 1) * math.log1p(-math.exp(-t)) - t + (d - 1) * math.log(t))

    peak = math.log(n)
    total, err = 0.0, 0.0
    for a, b in ((0.0, peak), (peak, 4 * peak + 50.0), (4 * peak + 50.0, np.inf)):
        v, e = integrate.quad(f, a, b, limit=400, epsabs=0.0, epsrel=rtol * 1e-2)
        total += v
        err += e
    val = n * total / math.factorial(d - 1)
    achieved = n * err / math.factorial(d - 1)
    if achieved > rtol * max(val, 1.0):
        raise QuadratureError(f"quadrature reached only {achieved:.3g} absolute error")
    return val


def harmonic(n: int) -> float:
    return float(math.fsum(1.0 / i for i in range(1, n + 1)))


def sample_linear_density(n: int, rng) -> np.ndarray:
    """n points in [0,1]^2 with density proportional to 1 + x + y (rejection)."""
    out = np.empty((0, 2))
    while out.shape[0] < n:
        m = 2 * (n - out.shape[0]) + 16
        cand = rng.random((m, 2))
        keep = rng.random(m) * 3.0 <= 1.0 + cand.sum(axis=1)
        out = np.vstack((out, cand[keep]))
    return out[:n]


def trial_rng(seed: int, *counter: int) -> np.random.Generator:
    """Independent stream per (master seed, trial counters)."""
    return np.random.default_rng([int(seed), *map(int, counter)])


@dataclass(frozen=True)
class GapTrial:
    n: int
    d: int
    K_n: int
    L_n: int
    ambiguous: int
    seed: int

    def __post_init__(self):
        if not 1 <= self.L_n <= self.K_n <= self.n:
            raise InvalidInputError(f"inconsistent trial sizes {self}")


def gap_trial(points, d: int | None = None, seed: int = -1, method: str = "auto") -> GapTrial:
    X = np.asarray(points, dtype=np.float64)
    F = first_front(X)
    res = scalarizable_subset(F, method)
    return GapTrial(X.shape[0], X.shape[1], res.K_n, res.L_n, int(res.ambiguous.sum()), seed)


def dyad_count_to_points(n: int) -> int:
    """Smallest N with C(N, 2) >= n."""
    N = int(math.ceil((1 + math.sqrt(1 + 8 * n)) / 2))
    while N > 2 and (N - 1) * (N - 2) // 2 >= n:
        N -= 1
    return max(N, 2)


@dataclass(frozen=True, eq=False)
class GapSummary:
    n: np.ndarray
    d: int
    realizations: int
    mean_K: np.ndarray
    mean_L: np.ndarray
    mean_gap: np.ndarray
    se_gap: np.ndarray
    mean_ratio: np.ndarray
    se_ratio: np.ndarray
    ambiguous: int

    @property
    def alpha(self) -> float:
        """Least-squares constant fitted to gap / ln n over the grid."""
        return float(np.mean(self.mean_gap / np.log(self.n)))

    def alpha_fits(self) -> dict[str, float]:
        ln = np.log(self.n.astype(np.float64))
        y = self.mean_gap
        slope, icpt = np.polyfit(ln, y / ln, 1) if ln.size > 1 else (0.0, float(y[0] / ln[0]))
        b, a = np.polyfit(ln, y, 1) if ln.size > 1 else (float(y[0] / ln[0]), 0.0)
        return {
            "alpha": self.alpha,
            "alpha_origin": float(ln @ y / (ln @ ln)),
            "alpha_with_intercept": float(b),
            "intercept": float(a),
            "ratio_slope": float(slope),
            "ratio_intercept": float(icpt),
        }


def _se(a: np.ndarray, axis=0) -> np.ndarray:
    R = a.shape[axis]
    if R < 2:
        return np.zeros(np.delete(a.shape, axis))
    return a.std(axis=axis, ddof=1) / math.sqrt(R)


def run_gap_experiment(
    n_grid,
    d: int = 2,
    realizations: int = 100,
    generator: str = "dyads",
    seed: int = 0,
    method: str = "auto",
) -> GapSummary:
    """Sample means of K_n, L_n and K_n - L_n over an ascending grid of n.

    With ``generator="dyads"`` each realization draws N_max uniform points and
    grid entry n uses the dyads of the first N points, where N is the
    smallest count giving at least n dyads; the reported n is C(N, 2).
    With ``generator="uniform"`` the first n of n_max i.i.d. points are used.
    """
    grid = np.asarray(n_grid, dtype=np.int64)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0) or grid[0] < 2:
        raise InvalidInputError("n grid must be ascending integers >= 2")
    if realizations < 1:
        raise InvalidInputError("realizations must be >= 1")
    if generator == "dyads":
        Ns = np.array([dyad_count_to_points(int(n)) for n in grid])
        ns = Ns * (Ns - 1) // 2
    elif generator == "uniform":
        Ns = grid
        ns = grid
    else:
        raise InvalidInputError(f"unknown generator {generator!r}")
    Kn = np.zeros((realizations, grid.size))
    Ln = np.zeros_like(Kn)
    amb = 0
    for r in range(realizations):
        rng = trial_rng(seed, r)
        P = rng.random((int(Ns[-1]), d))
        for g, N in enumerate(Ns):
            pts = points_to_dyads(P[:N]) if generator == "dyads" else P[:N]
            t = gap_trial(pts, seed=r, method=method)
            Kn[r, g], Ln[r, g] = t.K_n, t.L_n
            amb += t.ambiguous
    gap = Kn - Ln
    c = np.array([c_nd(int(n), d) for n in ns])
    return GapSummary(
        n=ns,
        d=d,
        realizations=realizations,
        mean_K=Kn.mean(axis=0),
        mean_L=Ln.mean(axis=0),
        mean_gap=gap.mean(axis=0),
        se_gap=_se(gap),
        mean_ratio=(gap / c).mean(axis=0),
        se_ratio=_se(gap / c),
        ambiguous=amb,
    )


def gap_bounds(d: int) -> tuple[float, float]:
    """Asymptotic band for E(K_n - L_n) / c_{n,d}."""
    return (d - 1) / (4 * d - 2), 1 - math.factorial(d) / d**d


@dataclass(frozen=True, eq=False)
class DimensionSweep:
    ds: np.ndarray
    n: int
    realizations: int
    mean_ratio: np.ndarray
    se: np.ndarray
    mean_gap: np.ndarray
    ambiguous: int


def run_dimension_sweep(ds=(2, 3, 4, 5), N: int = 448, realizations: int = 200, seed: int = 0) -> DimensionSweep:
    """(K_n - L_n) / c_{n,d} for the dyads of N uniform points, per dimension."""
    if realizations < 1 or N < 3:
        raise InvalidInputError("need realizations >= 1 and N >= 3")
    ds = np.asarray(ds, dtype=np.int64)
    n = N * (N - 1) // 2
    ratios = np.zeros((realizations, ds.size))
    amb = 0
    for gi, d in enumerate(ds):
        for r in range(realizations):
            P = trial_rng(seed, int(d), r).random((N, int(d)))
            t = gap_trial(points_to_dyads(P), seed=r)
            ratios[r, gi] = (t.K_n - t.L_n) / c_nd(n, int(d))
            amb += t.ambiguous
    c = np.array([c_nd(n, int(d)) for d in ds])
    return DimensionSweep(ds, n, realizations, ratios.mean(axis=0), _se(ratios), ratios.mean(axis=0) * c, amb)


def write_gap_csv(path, s: GapSummary) -> None:
    write_rows(
        path,
        ["n", "mean_gap", "se", "realizations"],
        ((int(n), float(g), float(e), s.realizations) for n, g, e in zip(s.n, s.mean_gap, s.se_gap)),
    )


def write_dimension_csv(path, sweep: DimensionSweep) -> None:
    rows = []
    for d, m, e in zip(sweep.ds, sweep.mean_ratio, sweep.se):
        lo, hi = gap_bounds(int(d))
        rows.append((int(d), float(m), float(e), lo, hi))
    write_rows(path, ["d", "mean_ratio", "se", "lower_bound", "upper_bound"], rows)

"""Dissimilarity measures and the K pairwise matrices built from them.

None of the measures here is assumed to be a metric: symmetrised KL and DTW
both violate the triangle inequality.
"""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Sequence

import numba as nb
import numpy as np

from .io import atomic_writer
from .pareto import InvalidInputError

DEFAULT_BINS = 20
DEFAULT_SMOOTHING = 1e-6


class CriterionError(RuntimeError):
    """A criterion failed on a specific pair of samples."""


# ---------------------------------------------------------------------------
# Categorical: Eskin et al. overlap-style dissimilarity
# ---------------------------------------------------------------------------


def eskin_weights(cardinalities) -> np.ndarray:
    """Per-attribute mismatch cost 2 / (n^2 + 2)."""
    n = np.asarray(cardinalities, dtype=np.float64)
    return 2.0 / (n * n + 2.0)


def eskin_dissimilarity(a, b, cardinalities, cardinalities_b=None) -> float:
    """Sum of 2/(n^2+2) over mismatching attributes of one group."""
    a = np.asarray(a)
    b = np.asarray(b)
    card = np.asarray(cardinalities)
    if cardinalities_b is not None and not np.array_equal(card, np.asarray(cardinalities_b)):
        raise InvalidInputError("cardinality mismatch between the two groups")
    if a.shape != b.shape or a.shape != card.shape:
        raise InvalidInputError(f"group shapes differ: {a.shape}, {b.shape}, cardinalities {card.shape}")
    return float(np.sum(eskin_weights(card) * (a != b)))


def eskin_cross(A, B, cardinalities) -> np.ndarray:
    """Eskin dissimilarity between every row of A and every row of B."""
    A = np.asarray(A)
    B = np.asarray(B)
    w = eskin_weights(cardinalities)
    out = np.zeros((A.shape[0], B.shape[0]))
    for j in range(A.shape[1]):
        out += w[j] * (A[:, j, None] != B[None, :, j])
    return out


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    points: np.ndarray
    traj_id: Any = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInputError(f"trajectory points must be (p, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("trajectory coordinates must be finite")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]


def _points(t) -> np.ndarray:
    return t.points if isinstance(t, Trajectory) else np.asarray(t, dtype=np.float64)


def speeds(t) -> np.ndarray:
    """Instantaneous speeds by first differences."""
    pts = _points(t)
    if pts.shape[0] < 2:
        raise InvalidInputError("a trajectory needs at least 2 points for a speed")
    return np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))


@dataclass(frozen=True)
class SpeedHistogram:
    bin_edges: np.ndarray
    mass: np.ndarray


def speed_edges(trajectories, bins: int = DEFAULT_BINS) -> np.ndarray:
    """Shared edges spanning [0, max speed over ``trajectories``]."""
    top = max(float(speeds(t).max()) for t in trajectories)
    if top <= 0:
        top = 1.0
    return np.linspace(0.0, top, bins + 1)


def speed_histogram(t, edges, smoothing: float = DEFAULT_SMOOTHING) -> SpeedHistogram:
    """Normalised histogram of speeds with additive smoothing.

    Speeds above the last edge land in the last bin.
    """
    edges = np.asarray(edges, dtype=np.float64)
    v = speeds(t)
    v = np.clip(v, edges[0], edges[-1])
    counts, _ = np.histogram(v, bins=edges)
    mass = counts / v.size
    if smoothing:
        mass = (mass + smoothing) / (1.0 + smoothing * mass.size)
    return SpeedHistogram(edges, mass)


def _mass(h) -> tuple[np.ndarray, np.ndarray | None]:
    if isinstance(h, SpeedHistogram):
        return h.mass, h.bin_edges
    return np.asarray(h, dtype=np.float64), None


def symmetrized_kl(p, q) -> float:
    """KL(p||q) + KL(q||p) in nats."""
    mp, ep = _mass(p)
    mq, eq = _mass(q)
    if ep is not None and eq is not None and not np.array_equal(ep, eq):
        raise InvalidInputError("histograms use different bin edges")
    if mp.shape != mq.shape:
        raise InvalidInputError("histograms have different bin counts")
    if np.any(mp <= 0) or np.any(mq <= 0):
        raise InvalidInputError("histogram masses must be strictly positive")
    return float(np.sum((mp - mq) * (np.log(mp) - np.log(mq))))


def symmetrized_kl_cross(P, Q, chunk: int = 256) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    lP, lQ = np.log(P), np.log(Q)
    out = np.empty((P.shape[0], Q.shape[0]))
    for s in range(0, P.shape[0], chunk):
        dp = P[s : s + chunk, None, :] - Q[None, :, :]
        dl = lP[s : s + chunk, None, :] - lQ[None, :, :]
        out[s : s + chunk] = np.sum(dp * dl, axis=2)
    return out


@nb.njit(cache=True)
def _dtw(s, t):
    n, m = s.shape[0], t.shape[0]
    prev = np.full(m + 1, np.inf)
    cur = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur[0] = np.inf
        for j in range(1, m + 1):
            dx = s[i - 1, 0] - t[j - 1, 0]
            dy = s[i - 1, 1] - t[j - 1, 1]
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = np.sqrt(dx * dx + dy * dy) + best
        prev, cur = cur, prev
    return prev[m]


@nb.njit(cache=True)
def _dtw_cross(flat_a, off_a, flat_b, off_b, symmetric):
    na = off_a.shape[0] - 1
    nb_ = off_b.shape[0] - 1
    out = np.zeros((na, nb_))
    for i in range(na):
        s = flat_a[off_a[i] : off_a[i + 1]]
        j0 = i + 1 if symmetric else 0
        for j in range(j0, nb_):
            out[i, j] = _dtw(s, flat_b[off_b[j] : off_b[j + 1]])
    return out


def dtw_dissimilarity(s, t) -> float:
    """Classic DTW with Euclidean local cost and no warping window."""
    a, b = _points(s), _points(t)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise InvalidInputError("DTW needs nonempty trajectories")
    return float(_dtw(np.ascontiguousarray(a), np.ascontiguousarray(b)))


def _pack(trajs):
    pts = [_points(t) for t in trajs]
    off = np.concatenate(([0], np.cumsum([p.shape[0] for p in pts]))).astype(np.int64)
    return np.ascontiguousarray(np.vstack(pts)), off


def dtw_cross(A, B) -> np.ndarray:
    """DTW between all pairs; computes each pair once when ``A is B``."""
    fa, oa = _pack(A)
    if A is B:
        U = _dtw_cross(fa, oa, fa, oa, True)
        return U + U.T
    fb, ob = _pack(B)
    return _dtw_cross(fa, oa, fb, ob, False)


def euclidean(a, b) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)))


def euclidean_cross(A, B) -> np.ndarray:
    from scipy.spatial.distance import cdist

    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    return cdist(A.reshape(A.shape[0], -1), B.reshape(B.shape[0], -1))


# ---------------------------------------------------------------------------
# Criterion objects and stacks
# ---------------------------------------------------------------------------


def _identity(samples):
    return samples


@dataclass(frozen=True)
class Criterion:
    """One dissimilarity measure.

    ``measure`` works on two raw samples. ``featurize`` maps a sample list to
    whatever ``cross`` consumes; ``cross`` returns the full matrix between two
    featurised sets. Without ``cross`` the pairwise loop falls back to
    ``measure``.
    """

    name: str
    measure: Callable[[Any, Any], float]
    featurize: Callable = _identity
    cross: Callable | None = None

    def matrix(self, A, B, symmetric: bool = False) -> np.ndarray:
        if self.cross is not None:
            return np.asarray(self.cross(self.featurize(A), self.featurize(B)), dtype=np.float64)
        out = np.zeros((len(A), len(B)))
        for i, a in enumerate(A):
            for j in range(i + 1 if symmetric else 0, len(B)):
                try:
                    out[i, j] = self.measure(a, B[j])
                except Exception as exc:
                    raise CriterionError(f"criterion {self.name!r} failed on pair ({i}, {j}): {exc}") from exc
        return out


def categorical_criteria(cardinalities) -> list[Criterion]:
    """One Eskin criterion per attribute group; samples are (K, attrs) arrays."""
    card = np.asarray(cardinalities)
    crits = []
    for g in range(card.shape[0]):
        cg = card[g]
        crits.append(
            Criterion(
                name=f"eskin_g{g + 1}",
                measure=lambda a, b, g=g, cg=cg: eskin_dissimilarity(np.asarray(a)[g], np.asarray(b)[g], cg),
                featurize=lambda S, g=g: np.asarray(S)[:, g, :],
                cross=lambda A, B, cg=cg: eskin_cross(A, B, cg),
            )
        )
    return crits


def trajectory_criteria(edges, smoothing: float = DEFAULT_SMOOTHING) -> list[Criterion]:
    """Speed (symmetrised KL of speed histograms) and shape (DTW)."""

    def hists(S):
        return np.array([speed_histogram(t, edges, smoothing).mass for t in S])

    speed = Criterion(
        name="speed_kl",
        measure=lambda a, b: symmetrized_kl(speed_histogram(a, edges, smoothing), speed_histogram(b, edges, smoothing)),
        featurize=hists,
        cross=symmetrized_kl_cross,
    )
    shape = Criterion(name="shape_dtw", measure=dtw_dissimilarity, cross=dtw_cross)
    return [speed, shape]


def coordinate_criteria(d: int) -> list[Criterion]:
    """|x_l - y_l| for each coordinate of vector samples."""
    return [
        Criterion(
            name=f"absdiff_{l + 1}",
            measure=lambda a, b, l=l: abs(float(a[l]) - float(b[l])),
            featurize=lambda S, l=l: np.asarray(S, dtype=np.float64)[:, l],
            cross=lambda A, B: np.abs(A[:, None] - B[None, :]),
        )
        for l in range(d)
    ]


EUCLIDEAN = Criterion(name="euclidean", measure=euclidean, cross=euclidean_cross)


@dataclass(frozen=True, eq=False)
class DissimilarityStack:
    """K symmetric, zero-diagonal, nonnegative N x N matrices."""

    matrices: np.ndarray
    names: tuple[str, ...]

    def __post_init__(self):
        D = np.asarray(self.matrices, dtype=np.float64)
        if D.ndim != 3 or D.shape[1] != D.shape[2]:
            raise InvalidInputError(f"stack must be (K, N, N), got {D.shape}")
        if len(self.names) != D.shape[0]:
            raise InvalidInputError("one name per criterion required")
        if not np.all(np.isfinite(D)) or np.any(D < 0):
            raise InvalidInputError("dissimilarities must be finite and nonnegative")
        if np.any(np.diagonal(D, axis1=1, axis2=2) != 0):
            raise InvalidInputError("diagonal must be zero")
        if not np.array_equal(D, np.swapaxes(D, 1, 2)):
            raise InvalidInputError("matrices must be symmetric")
        D.setflags(write=False)
        object.__setattr__(self, "matrices", D)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def K(self) -> int:
        return self.matrices.shape[0]

    @property
    def N(self) -> int:
        return self.matrices.shape[1]

    def scaled(self, factors) -> "DissimilarityStack":
        f = np.asarray(factors, dtype=np.float64)[:, None, None]
        return DissimilarityStack(self.matrices * f, self.names)


def _symmetrize_upper(M: np.ndarray) -> np.ndarray:
    U = np.triu(M, 1)
    return U + U.T


def pairwise_stack(samples: Sequence, criteria: Sequence[Criterion]) -> DissimilarityStack:
    """All K pairwise matrices over ``samples``."""
    if len(samples) < 2:
        raise InvalidInputError("need at least 2 samples")
    mats = []
    for c in criteria:
        M = c.matrix(samples, samples, symmetric=True)
        mats.append(_symmetrize_upper(M))
    return DissimilarityStack(np.stack(mats), tuple(c.name for c in criteria))


def cross_stack(test_samples: Sequence, train_samples: Sequence, criteria: Sequence[Criterion]) -> np.ndarray:
    """(K, n_test, N) test-to-train dissimilarities."""
    out = []
    for c in criteria:
        try:
            out.append(c.matrix(test_samples, train_samples))
        except CriterionError:
            raise
        except Exception as exc:
            raise CriterionError(f"criterion {c.name!r} failed: {exc}") from exc
    return np.stack(out)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------


def write_trajectories_csv(path, trajectories: Sequence, ids: Sequence | None = None) -> None:
    """Rows ``traj_id,t,x,y`` grouped by trajectory."""
    ids = list(range(len(trajectories))) if ids is None else list(ids)
    with atomic_writer(path) as fh:
        fh.write("traj_id,t,x,y\n")
        for tid, tr in zip(ids, trajectories):
            for t, (x, y) in enumerate(_points(tr)):
                fh.write(f"{tid},{t},{float(x)!r},{float(y)!r}\n")


def read_trajectories_csv(path) -> dict[str, Trajectory]:
    rows = defaultdict(list)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"traj_id", "t", "x", "y"} - set(reader.fieldnames or [])
        if missing:
            raise InvalidInputError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            rows[row["traj_id"]].append((float(row["t"]), float(row["x"]), float(row["y"])))
    out = {}
    for tid, pts in rows.items():
        pts.sort(key=lambda r: r[0])
        out[tid] = Trajectory(np.array([(x, y) for _, x, y in pts]), tid)
    return out


def write_stack(directory, stack: DissimilarityStack, prefix: str = "train") -> Path:
    """Write one CSV matrix per criterion plus ``manifest.json``."""
    directory = Path(directory)
    entries = []
    for name, M in zip(stack.names, stack.matrices):
        fname = f"{prefix}_{name}.csv"
        _write_matrix(directory / fname, M)
        entries.append({"name": name, prefix: fname})
    manifest = directory / "manifest.json"
    with atomic_writer(manifest) as fh:
        json.dump({"criteria": entries}, fh, indent=2)
    return manifest


def _write_matrix(path, M) -> None:
    with atomic_writer(path) as fh:
        for row in np.asarray(M):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)


def read_stack_manifest(path, key: str = "train") -> tuple[list[str], np.ndarray]:
    """Load the matrices named under ``key`` for each criterion in a manifest."""
    path = Path(path)
    spec = json.loads(path.read_text())
    names, mats = [], []
    for entry in spec["criteria"]:
        if key not in entry:
            raise InvalidInputError(f"{path}: criterion {entry.get('name')!r} has no {key!r} matrix")
        names.append(entry["name"])
        mats.append(read_matrix(path.parent / entry[key]))
    return names, np.stack(mats)

"""Dominance, non-dominated sorting into Pareto fronts, and Pareto depth."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import _kernels
from .io import atomic_writer


class InvalidInputError(ValueError):
    """Raised when an input violates a documented precondition."""


@dataclass(frozen=True)
class Dyad:
    """Dissimilarities between one pair of samples, one entry per criterion."""

    values: tuple[float, ...]
    left: int = -1
    right: int = -1

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 1:
            raise InvalidInputError("a dyad needs at least one criterion")
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise InvalidInputError(f"dyad coordinates must be finite and >= 0: {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def K(self) -> int:
        return len(self.values)


def as_dyad_array(dyads) -> np.ndarray:
    """Coerce a list of :class:`Dyad` or an (n, K) array-like into float64."""
    if isinstance(dyads, np.ndarray):
        arr = np.asarray(dyads, dtype=np.float64)
    else:
        seq = list(dyads)
        if seq and isinstance(seq[0], Dyad):
            widths = {d.K for d in seq}
            if len(widths) != 1:
                raise InvalidInputError(f"mixed criterion counts {sorted(widths)}")
            arr = np.array([d.values for d in seq], dtype=np.float64)
        else:
            arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1 and arr.size:
        arr = arr[:, None]
    if arr.size == 0:
        raise InvalidInputError("empty dyad set")
    if arr.ndim != 2:
        raise InvalidInputError(f"dyads must form an (n, K) array, got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def _values(d) -> np.ndarray:
    if isinstance(d, Dyad):
        return np.asarray(d.values, dtype=np.float64)
    return np.asarray(d, dtype=np.float64).ravel()


def strictly_dominates(a, b) -> bool:
    """True iff ``a`` is <= ``b`` everywhere and < somewhere."""
    va, vb = _values(a), _values(b)
    if va.shape != vb.shape:
        raise InvalidInputError(f"dimension mismatch: {va.size} vs {vb.size}")
    return bool(np.all(va <= vb) and np.any(va < vb))


@dataclass(frozen=True, eq=False)
class FrontLedger:
    """Partition of a dyad set into fronts F_1..F_M.

    ``depth_of[i]`` is the 1-based front index of dyad ``i``. ``fronts[j]``
    holds the indices of F_{j+1}. For K = 2 each front is also kept sorted
    by its first coordinate for accelerated queries.
    """

    dyads: np.ndarray
    depth_of: np.ndarray
    fronts: list[np.ndarray] = field(repr=False)
    _members: np.ndarray = field(repr=False)
    _offsets: np.ndarray = field(repr=False)
    _by_depth: np.ndarray = field(repr=False)

    @classmethod
    def from_depths(cls, dyads, depth_of) -> "FrontLedger":
        Y = as_dyad_array(dyads)
        depth = np.asarray(depth_of, dtype=np.int64)
        if depth.shape != (Y.shape[0],):
            raise InvalidInputError("one depth per dyad required")
        if depth.min() < 1:
            raise InvalidInputError("depths are 1-based")
        M = int(depth.max())
        if Y.shape[1] == 2:
            # sort members within each front by first coordinate
            order = np.lexsort((-Y[:, 1], Y[:, 0], depth))
        else:
            order = np.lexsort((np.arange(Y.shape[0]), depth))
        counts = np.bincount(depth, minlength=M + 1)[1:]
        if np.any(counts == 0):
            raise InvalidInputError("front indices must be contiguous from 1")
        offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        fronts = [np.sort(order[offsets[j] : offsets[j + 1]]) for j in range(M)]
        Y.setflags(write=False)
        depth.setflags(write=False)
        return cls(Y, depth, fronts, order.astype(np.int64), offsets, order.astype(np.int64))

    @property
    def M(self) -> int:
        return len(self.fronts)

    @property
    def K(self) -> int:
        return self.dyads.shape[1]

    @property
    def n(self) -> int:
        return self.dyads.shape[0]

    def sorted_views(self) -> list[np.ndarray]:
        """Per-front member indices ascending by coordinate 1 (K = 2 only)."""
        if self.K != 2:
            raise InvalidInputError("sorted views are maintained only for K = 2")
        return [self._members[self._offsets[j] : self._offsets[j + 1]] for j in range(self.M)]

    @cached_property
    def _depth_sorted(self):
        # dyads grouped by front, plus per-front orders along each coordinate
        Ys = np.ascontiguousarray(self.dyads[self._by_depth])
        front_of = self.depth_of[self._by_depth]
        perm = np.empty((self.K, self.n), dtype=np.int64)
        for l in range(self.K):
            perm[l] = np.lexsort((Ys[:, l], front_of))
        vals = np.ascontiguousarray(np.take_along_axis(Ys.T, perm, axis=1))
        return Ys, vals, perm

    @cached_property
    def _prefix_skylines(self):
        # slot j holds the max-skyline of F_1..F_j; slot 0 is empty
        K = self.K
        blocks = [np.empty((0, K))]
        env = np.empty((0, K))
        for j in range(self.M):
            cand = np.vstack((env, self.dyads[self.fronts[j]]))
            cand = np.unique(cand, axis=0)
            env = cand[first_front_mask(-cand)]
            if K == 2:
                env = env[np.argsort(env[:, 0], kind="stable")]
            blocks.append(env)
        eoff = np.concatenate(([0], np.cumsum([b.shape[0] for b in blocks]))).astype(np.int64)
        E = np.ascontiguousarray(np.vstack(blocks))
        sm = np.empty(0)
        if K == 2:
            sm = np.empty(E.shape[0])
            for j in range(self.M + 1):
                seg = E[eoff[j] : eoff[j + 1], 1]
                sm[eoff[j] : eoff[j + 1]] = np.maximum.accumulate(seg[::-1])[::-1]
        return E, sm, eoff

    def depths(self, queries, mode: str = "exact", return_fallbacks: bool = False):
        """Pareto depth of each query dyad; M+1 when it dominates nothing."""
        Q = as_dyad_array(queries)
        if Q.shape[1] != self.K:
            raise InvalidInputError(f"dimension mismatch: ledger K={self.K}, query K={Q.shape[1]}")
        if mode == "exact":
            Ys, vals, perm = self._depth_sorted
            out = _kernels.exact_depths(Ys, Q, self._offsets, vals, perm, self.M + 1)
            fallback = np.zeros(Q.shape[0], dtype=bool)
        elif mode == "accelerated":
            use2d = self.K == 2
            xs = self.dyads[self._members, 0] if use2d else np.empty(0)
            ys = self.dyads[self._members, 1] if use2d else np.empty(0)
            E, sm, eoff = self._prefix_skylines
            out, fallback = _kernels.accelerated_depths(
                self.dyads, Q, self._members, xs, ys, self._offsets, E, sm, eoff, use2d
            )
        else:
            raise InvalidInputError(f"unknown depth mode {mode!r}")
        return (out, fallback) if return_fallbacks else out


def _check_nonneg(Y: np.ndarray) -> None:
    if not np.all(np.isfinite(Y)):
        raise InvalidInputError("dyad coordinates must be finite")
    if np.any(Y < 0):
        raise InvalidInputError("dyad coordinates must be nonnegative")


def sort_deb(dyads) -> FrontLedger:
    """Deb et al. fast non-dominated sort; kept as the reference oracle."""
    Y = as_dyad_array(dyads)
    _check_nonneg(Y)
    return FrontLedger.from_depths(Y, _kernels.deb_ranks(Y) + 1)


def jensen_depths(Y: np.ndarray) -> np.ndarray:
    """1-based front indices by Jensen's divide and conquer (Fortin variant).

    Duplicates are collapsed first; equal dyads never dominate each other, so
    they share a front.
    """
    uniq, inverse = np.unique(Y, axis=0, return_inverse=True)
    rank = _kernels.jensen_ranks_unique(np.ascontiguousarray(uniq))
    return rank[inverse.ravel()] + 1


def sort_jensen(dyads) -> FrontLedger:
    """Non-dominated sort in O(n log^{K-1} n) comparisons."""
    Y = as_dyad_array(dyads)
    _check_nonneg(Y)
    return FrontLedger.from_depths(Y, jensen_depths(Y))


SORTERS = {"deb": sort_deb, "jensen": sort_jensen}


def pareto_depth(ledger: FrontLedger, d, mode: str = "exact") -> int:
    """Smallest j such that ``d`` strictly dominates a member of F_j, else M+1."""
    v = _values(d)
    if v.size != ledger.K:
        raise InvalidInputError(f"dimension mismatch: ledger K={ledger.K}, dyad K={v.size}")
    return int(ledger.depths(v[None, :], mode=mode)[0])


def first_front_mask(points) -> np.ndarray:
    """Boolean mask of points not strictly dominated by any other point."""
    X = as_dyad_array(points)
    order = np.lexsort(X.T[::-1])
    mask_sorted = _kernels.skyline_mask_sorted(np.ascontiguousarray(X[order]))
    mask = np.empty(X.shape[0], dtype=bool)
    mask[order] = mask_sorted
    return mask


# ---------------------------------------------------------------------------
# CSV formats
# ---------------------------------------------------------------------------


def write_dyads_csv(path, dyads: Sequence[Dyad] | np.ndarray, left=None, right=None) -> None:
    """Write ``left,right,c1,...,cK`` rows."""
    if isinstance(dyads, np.ndarray):
        Y = as_dyad_array(dyads)
        left = np.full(Y.shape[0], -1) if left is None else np.asarray(left)
        right = np.full(Y.shape[0], -1) if right is None else np.asarray(right)
        rows = zip(left, right, Y)
    else:
        rows = ((d.left, d.right, d.values) for d in dyads)
        Y = as_dyad_array(dyads)
    K = Y.shape[1]
    with atomic_writer(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["left", "right"] + [f"c{i + 1}" for i in range(K)])
        for lft, rgt, vals in rows:
            w.writerow([int(lft), int(rgt)] + [repr(float(v)) for v in vals])


def read_dyads_csv(path) -> list[Dyad]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["left", "right"] or len(header) < 3:
            raise InvalidInputError(f"{path}: expected header left,right,c1,...,cK")
        return [Dyad(tuple(float(v) for v in row[2:]), int(row[0]), int(row[1])) for row in reader if row]


def write_ledger_csv(path, ledger: FrontLedger) -> None:
    """Write ``dyad_index,depth`` rows."""
    with atomic_writer(path) as fh:
        fh.write("dyad_index,depth\n")
        for i, dep in enumerate(ledger.depth_of):
            fh.write(f"{i},{int(dep)}\n")


def read_ledger_depths(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.int64, ndmin=2)
    idx, dep = data[:, 0], data[:, 1]
    out = np.empty(idx.size, dtype=np.int64)
    out[idx] = dep
    return out


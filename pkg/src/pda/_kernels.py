"""Compiled inner loops for non-dominated sorting and depth queries.

All ranks in this module are 0-based; the public wrappers in
:mod:`pda.pareto` convert to 1-based front indices.
"""

import numba as nb
import numpy as np

_BRUTE_A = 24
_BRUTE_B = 4096


@nb.njit(cache=True, inline="always")
def _strictly_dominates(a, b):
    strict = False
    for i in range(a.shape[0]):
        if a[i] > b[i]:
            return False
        if a[i] < b[i]:
            strict = True
    return strict


@nb.njit(cache=True, inline="always")
def _weakly_below(X, p, q, k):
    # X[p, :k] <= X[q, :k] componentwise
    for i in range(k):
        if X[p, i] > X[q, i]:
            return False
    return True


# ---------------------------------------------------------------------------
# Deb et al. fast non-dominated sort, O(K n^2) comparisons, O(n) memory.
# ---------------------------------------------------------------------------


@nb.njit(cache=True)
def deb_ranks(X):
    n = X.shape[0]
    count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if _strictly_dominates(X[i], X[j]):
                count[j] += 1
            elif _strictly_dominates(X[j], X[i]):
                count[i] += 1
    rank = np.full(n, -1, dtype=np.int64)
    current = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        if count[i] == 0:
            current[m] = i
            m += 1
    nxt = np.empty(n, dtype=np.int64)
    front = 0
    while m > 0:
        for t in range(m):
            rank[current[t]] = front
        m2 = 0
        # the dominated set of each member is recomputed instead of stored
        for t in range(m):
            p = current[t]
            for q in range(n):
                if rank[q] < 0 and _strictly_dominates(X[p], X[q]):
                    count[q] -= 1
                    if count[q] == 0:
                        nxt[m2] = q
                        m2 += 1
        current, nxt = nxt, current
        m = m2
        front += 1
    return rank


# ---------------------------------------------------------------------------
# Jensen / Fortin divide-and-conquer sort on unique, lexicographically sorted
# points. Invariants are documented on the two helpers.
# ---------------------------------------------------------------------------


@nb.njit(cache=True)
def _fenwick_update(tree, pos, value):
    i = pos + 1
    n = tree.shape[0]
    while i < n:
        if tree[i] < value:
            tree[i] = value
        i += i & (-i)


@nb.njit(cache=True)
def _fenwick_query(tree, pos):
    # max over compressed positions 0..pos
    best = -1
    i = pos + 1
    while i > 0:
        if tree[i] > best:
            best = tree[i]
        i -= i & (-i)
    return best


@nb.njit(cache=True)
def _sweep_a(X, S, rank):
    # objectives >= 2 are constant on S; S is in lexicographic order
    vals = np.empty(S.shape[0])
    for i in range(S.shape[0]):
        vals[i] = X[S[i], 1]
    keys = np.unique(vals)
    tree = np.full(keys.shape[0] + 1, -1, dtype=np.int64)
    for i in range(S.shape[0]):
        s = S[i]
        pos = np.searchsorted(keys, X[s, 1])
        best = _fenwick_query(tree, pos)
        if best + 1 > rank[s]:
            rank[s] = best + 1
        _fenwick_update(tree, pos, rank[s])


@nb.njit(cache=True)
def _sweep_b(X, L, H, rank):
    lv0 = np.empty(L.shape[0])
    for i in range(L.shape[0]):
        lv0[i] = X[L[i], 0]
    hv0 = np.empty(H.shape[0])
    for i in range(H.shape[0]):
        hv0[i] = X[H[i], 0]
    lo = np.argsort(lv0, kind="mergesort")
    ho = np.argsort(hv0, kind="mergesort")
    lv1 = np.empty(L.shape[0])
    for i in range(L.shape[0]):
        lv1[i] = X[L[i], 1]
    keys = np.unique(lv1)
    tree = np.full(keys.shape[0] + 1, -1, dtype=np.int64)
    j = 0
    for t in range(H.shape[0]):
        h = H[ho[t]]
        while j < L.shape[0] and X[L[lo[j]], 0] <= X[h, 0]:
            l = L[lo[j]]
            _fenwick_update(tree, np.searchsorted(keys, X[l, 1]), rank[l])
            j += 1
        pos = np.searchsorted(keys, X[h, 1], side="right") - 1
        if pos >= 0:
            best = _fenwick_query(tree, pos)
            if best + 1 > rank[h]:
                rank[h] = best + 1


@nb.njit(cache=True)
def _brute_b(X, L, H, k, rank):
    for b in range(H.shape[0]):
        h = H[b]
        r = rank[h]
        for a in range(L.shape[0]):
            l = L[a]
            if rank[l] >= r and _weakly_below(X, l, h, k):
                r = rank[l] + 1
        rank[h] = r


@nb.njit(cache=True)
def _helper_a(X, S, k, rank):
    """Finalise ranks inside S.

    Points of S agree on objectives k..K-1, and every dominator outside S
    has already pushed its rank into S.
    """
    n = S.shape[0]
    if n < 2:
        return
    if n <= _BRUTE_A:
        for b in range(1, n):
            for a in range(b):
                if _weakly_below(X, S[a], S[b], k) and rank[S[a]] + 1 > rank[S[b]]:
                    rank[S[b]] = rank[S[a]] + 1
        return
    if k == 1:
        for i in range(1, n):
            if rank[S[i - 1]] + 1 > rank[S[i]]:
                rank[S[i]] = rank[S[i - 1]] + 1
        return
    if k == 2:
        _sweep_a(X, S, rank)
        return
    obj = k - 1
    vals = np.empty(n)
    for i in range(n):
        vals[i] = X[S[i], obj]
    if vals.min() == vals.max():
        _helper_a(X, S, k - 1, rank)
        return
    # stable sort keeps lexicographic position as the tie-break, so no point
    # of the upper half can dominate a point of the lower half
    order = np.argsort(vals, kind="mergesort")
    half = n // 2
    L = np.sort(S[order[:half]])
    H = np.sort(S[order[half:]])
    _helper_a(X, L, k, rank)
    _helper_b(X, L, H, k - 1, rank)
    _helper_a(X, H, k, rank)


@nb.njit(cache=True)
def _helper_b(X, L, H, k, rank):
    """Push final ranks of L into H using objectives 0..k-1.

    Every l in L is <= every h in H on objectives k..K-1.
    """
    nl = L.shape[0]
    nh = H.shape[0]
    if nl == 0 or nh == 0:
        return
    if nl == 1 or nh == 1 or nl * nh <= _BRUTE_B:
        _brute_b(X, L, H, k, rank)
        return
    if k == 1:
        lv = np.empty(nl)
        for i in range(nl):
            lv[i] = X[L[i], 0]
        hv = np.empty(nh)
        for i in range(nh):
            hv[i] = X[H[i], 0]
        lo = np.argsort(lv, kind="mergesort")
        ho = np.argsort(hv, kind="mergesort")
        j = 0
        best = -1
        for t in range(nh):
            h = H[ho[t]]
            while j < nl and lv[lo[j]] <= X[h, 0]:
                if rank[L[lo[j]]] > best:
                    best = rank[L[lo[j]]]
                j += 1
            if best + 1 > rank[h]:
                rank[h] = best + 1
        return
    if k == 2:
        _sweep_b(X, L, H, rank)
        return
    obj = k - 1
    lv = np.empty(nl)
    for i in range(nl):
        lv[i] = X[L[i], obj]
    hv = np.empty(nh)
    for i in range(nh):
        hv[i] = X[H[i], obj]
    if lv.max() <= hv.min():
        _helper_b(X, L, H, k - 1, rank)
        return
    if lv.min() > hv.max():
        return
    allv = np.sort(np.concatenate((lv, hv)))
    pivot = allv[allv.shape[0] // 2]
    if pivot == allv[0]:
        pivot = allv[np.searchsorted(allv, allv[0], side="right")]
    L1 = L[lv < pivot]
    L2 = L[lv >= pivot]
    H1 = H[hv < pivot]
    H2 = H[hv >= pivot]
    _helper_b(X, L1, H1, k, rank)
    _helper_b(X, L1, H2, k - 1, rank)
    _helper_b(X, L2, H2, k, rank)


@nb.njit(cache=True)
def jensen_ranks_unique(X):
    """Ranks of unique rows of X, which must be in lexicographic order."""
    n = X.shape[0]
    rank = np.zeros(n, dtype=np.int64)
    _helper_a(X, np.arange(n), X.shape[1], rank)
    return rank


# ---------------------------------------------------------------------------
# Depth queries
# ---------------------------------------------------------------------------


@nb.njit(cache=True, parallel=True)
def exact_depths(Ys, Q, offsets, vals, perm, sentinel):
    """Smallest depth among training dyads strictly dominated by each query.

    ``Ys`` holds the training dyads front by front, F_{j+1} occupying
    ``Ys[offsets[j]:offsets[j+1]]``. Within each front segment,
    ``perm[l]`` orders the members by coordinate l and ``vals[l]`` holds the
    sorted values. A dominated member must be >= q in every coordinate, so
    only the tail of the most selective coordinate is scanned.
    """
    m = Q.shape[0]
    K = Q.shape[1]
    M = offsets.shape[0] - 1
    out = np.empty(m, dtype=np.int64)
    for qi in nb.prange(m):
        q = Q[qi]
        res = sentinel
        for j in range(M):
            start = offsets[j]
            stop = offsets[j + 1]
            best_l = 0
            best_pos = stop
            empty = False
            for l in range(K):
                pos = start + np.searchsorted(vals[l, start:stop], q[l], side="left")
                if pos == stop:
                    empty = True
                    break
                if l == 0 or pos > best_pos:
                    best_pos = pos
                    best_l = l
            if empty:
                continue
            for t in range(best_pos, stop):
                if _strictly_dominates(q, Ys[perm[best_l, t]]):
                    res = j + 1
                    break
            if res != sentinel:
                break
        out[qi] = res
    return out


@nb.njit(cache=True)
def _below_2d(xs, ys, start, stop, a, b):
    # front members xs[start:stop] ascending, ys non-increasing
    i = start + np.searchsorted(xs[start:stop], a, side="left")
    i2 = start + np.searchsorted(xs[start:stop], a, side="right")
    if i2 < stop and ys[i2] >= b:
        return True
    if i < i2 and ys[i] > b:
        return True
    return False


@nb.njit(cache=True)
def _below_general(Y, members, start, stop, q):
    for t in range(start, stop):
        if _strictly_dominates(q, Y[members[t]]):
            return True
    return False


@nb.njit(cache=True)
def _below(Y, members, xs, ys, offsets, j, q, use2d):
    start = offsets[j - 1]
    stop = offsets[j]
    if use2d:
        return _below_2d(xs, ys, start, stop, q[0], q[1])
    return _below_general(Y, members, start, stop, q)


@nb.njit(cache=True)
def _cum_below(E, sm, eoff, j, q, use2d):
    """True iff q strictly dominates some dyad of depth <= j.

    Slot j of (E, eoff) holds the max-skyline of fronts 1..j; every dyad of
    those fronts is weakly below one of its points, so scanning it suffices.
    """
    start = eoff[j]
    stop = eoff[j + 1]
    if start == stop:
        return False
    if use2d:
        xs = E[start:stop, 0]
        i_gt = start + np.searchsorted(xs, q[0], side="right")
        i_ge = start + np.searchsorted(xs, q[0], side="left")
        if i_gt < stop and sm[i_gt] >= q[1]:
            return True
        if i_ge < stop and sm[i_ge] > q[1]:
            return True
        return False
    for t in range(start, stop):
        if _strictly_dominates(q, E[t]):
            return True
    return False


@nb.njit(cache=True)
def accelerated_depths(Y, Q, members, xs, ys, offsets, E, sm, eoff, use2d):
    """Binary search over fronts with a prefix certificate.

    The per-front search assumes "q is below F_j" is monotone in j, which
    does not hold in general. Each answer j is certified by checking that q
    dominates nothing in F_1..F_{j-1}; uncertified queries are redone by a
    binary search on that prefix predicate, which is monotone, and flagged.
    """
    M = offsets.shape[0] - 1
    m = Q.shape[0]
    out = np.empty(m, dtype=np.int64)
    fallback = np.zeros(m, dtype=np.bool_)
    for qi in range(m):
        q = Q[qi]
        lo = 1
        hi = M + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _below(Y, members, xs, ys, offsets, mid, q, use2d):
                hi = mid
            else:
                lo = mid + 1
        if not _cum_below(E, sm, eoff, lo - 1, q, use2d):
            out[qi] = lo
            continue
        fallback[qi] = True
        lo = 1
        hi = M + 1
        while lo < hi:
            mid = (lo + hi) // 2
            if _cum_below(E, sm, eoff, mid, q, use2d):
                hi = mid
            else:
                lo = mid + 1
        out[qi] = lo
    return out, fallback


# ---------------------------------------------------------------------------
# First front (skyline) of a point set
# ---------------------------------------------------------------------------


@nb.njit(cache=True)
def skyline_mask_sorted(X):
    """Non-dominated mask for rows of X already in lexicographic order."""
    n = X.shape[0]
    mask = np.zeros(n, dtype=np.bool_)
    front = np.empty(n, dtype=np.int64)
    m = 0
    for i in range(n):
        dominated = False
        for t in range(m - 1, -1, -1):
            if _strictly_dominates(X[front[t]], X[i]):
                dominated = True
                break
        if not dominated:
            mask[i] = True
            front[m] = i
            m += 1
    return mask

"""Pure-numpy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable or when
``FACETPROTO_PURE=1``. Mathematically identical to the compiled kernels;
floating-point sums may differ from them in the last ulp because numpy
reduces in a different order.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "pure"

# Kendall tau-b over two length-m columns.
#
# With C/D the concordant/discordant pair counts, n0 = m(m-1)/2 and n1/n2
# the tie-pair counts of either column,
#     tau_b = (C - D) / sqrt((n0 - n1) * (n0 - n2))
# and C - D = n0 - n1 - n2 + n3 - 2 * dis, where n3 counts jointly tied
# pairs and dis the discordant pairs. A constant column makes the
# denominator zero; the engine defines that case as tau = 0.


def _tie_pairs(sorted_vals: np.ndarray) -> int:
    """Sum t*(t-1)/2 over runs of equal values in a sorted array."""
    if sorted_vals.shape[0] < 2:
        return 0
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0)
    starts = np.concatenate(([0], boundaries + 1))
    ends = np.concatenate((boundaries + 1, [sorted_vals.shape[0]]))
    runs = ends - starts
    return int(np.sum(runs * (runs - 1) // 2))


def _discordant_and_joint_ties(x: np.ndarray, y: np.ndarray) -> tuple[int, int]:
    """Count discordant pairs and joint-tie pairs via a lexicographic sort.

    After sorting by (x, y), strict inversions of the y sequence are exactly
    the discordant pairs (pairs tied in x are y-sorted, hence never counted).
    """
    order = np.lexsort((y, x))
    ys = y[order]
    xs = x[order]
    joint = _tie_pairs(_joint_key(xs, ys))
    dis = _count_inversions(ys.copy())
    return dis, joint


def _joint_key(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    # runs of equal (x, y) pairs in lex order; encode pair change points
    change = np.empty(xs.shape[0], dtype=np.int64)
    change[0] = 0
    if xs.shape[0] > 1:
        diff = (np.diff(xs) != 0) | (np.diff(ys) != 0)
        change[1:] = np.cumsum(diff)
    return change


def _count_inversions(a: np.ndarray) -> int:
    """Strict inversion count by iterative mergesort (numpy merge steps)."""
    n = a.shape[0]
    inv = 0
    width = 1
    buf = np.empty_like(a)
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            left, right = a[lo:mid], a[mid:hi]
            # each right element is inverted with the left elements strictly
            # greater than it; side="right" keeps ties non-inverted
            pos = np.searchsorted(left, right, side="right")
            inv += int(np.sum(left.shape[0] - pos))
            merged = buf[lo:hi]
            idx = pos + np.arange(right.shape[0])
            mask = np.zeros(hi - lo, dtype=bool)
            mask[idx] = True
            merged[mask] = right
            merged[~mask] = left
            a[lo:hi] = merged
        width *= 2
    return inv


def kendall_tau(x: np.ndarray, y: np.ndarray) -> float:
    """Tie-corrected Kendall tau-b; 0 when either column is constant."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    m = x.shape[0]
    n0 = m * (m - 1) // 2
    n1 = _tie_pairs(np.sort(x))
    n2 = _tie_pairs(np.sort(y))
    if n0 - n1 == 0 or n0 - n2 == 0:
        return 0.0
    dis, n3 = _discordant_and_joint_ties(x, y)
    con_minus_dis = n0 - n1 - n2 + n3 - 2 * dis
    return float(con_minus_dis) / np.sqrt(float((n0 - n1) * (n0 - n2)))


def tau_prepare(columns: np.ndarray):
    """Precompute shared state for ``tau_block`` from an (m, n_v) matrix."""
    return np.ascontiguousarray(columns.T)


def tau_block(state, out: np.ndarray, row_start: int, row_end: int) -> None:
    """Fill rows [row_start, row_end) of the pairwise tau matrix.

    ``out`` is a preallocated (n_v, n_v) array whose strict upper triangle
    rows are written (the caller mirrors). Row i only touches out[i, i+1:],
    so disjoint row blocks are thread-safe.
    """
    cols_t = state
    n_v = cols_t.shape[0]
    for i in range(row_start, row_end):
        for j in range(i + 1, n_v):
            out[i, j] = kendall_tau(cols_t[i], cols_t[j])


def importance_row(
    features: np.ndarray,
    labels: np.ndarray,
    prototypes: np.ndarray,
    eps: float,
    cap: float,
) -> np.ndarray:
    """Per-coordinate importance of one episode.

    ``features`` is (T, n_v) over support-plus-query examples, ``labels``
    their class indices, ``prototypes`` (N, n_v). For each example and
    coordinate, the term is ReLU(other / own - 1) with
    other = mean_{d != c} (x - v_d)^2 and own = (x - v_c)^2 + eps, clipped
    at ``cap``; terms are summed per class and averaged over classes. Only
    individual terms are capped, so the 1-shot support degeneracy becomes
    a rank-neutral constant offset instead of saturating whole entries.
    """
    n, n_v = prototypes.shape
    sums = np.zeros((n, n_v), dtype=np.float64)
    for t in range(features.shape[0]):
        c = int(labels[t])
        sq = (features[t] - prototypes) ** 2  # (N, n_v)
        total = np.zeros(n_v, dtype=np.float64)
        for d in range(n):
            total += sq[d]
        num = total - sq[c]
        den = (n - 1) * (sq[c] + eps)
        term = np.clip(num / den - 1.0, 0.0, cap)
        sums[c] += term
    acc = np.zeros(n_v, dtype=np.float64)
    for c in range(n):
        acc += sums[c]
    return acc / n


def blended_scores(
    queries: np.ndarray,
    prototypes: np.ndarray,
    coord_weights: np.ndarray,
    lam: float,
) -> np.ndarray:
    """Blended distance of every query to every prototype, shape (Tq, N).

    score[q, c] = sum_j (1 + lam * w_j) * (queries[q, j] - prototypes[c, j])^2
    which equals squared Euclidean plus lam times the facet-weighted distance.
    """
    diff = queries[:, None, :] - prototypes[None, :, :]
    sq = diff * diff
    return np.einsum("qcj,j->qc", sq, 1.0 + lam * coord_weights)

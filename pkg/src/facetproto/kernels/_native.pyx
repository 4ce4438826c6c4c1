# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Kendall tau-b pairs/blocks, per-episode coordinate
importance, and blended prototype distances. The Python adapter in
``native.py`` owns allocation and numpy-side preprocessing; everything here
runs without the GIL so row blocks can be dispatched to threads.
"""

from libc.stdlib cimport free, malloc
from libc.math cimport sqrt


cdef long long _merge_count_sort(double* a, double* buf, Py_ssize_t n) nogil:
    """Sort ``a`` ascending in place, returning the strict inversion count.

    Bottom-up mergesort; ties take the left element first so equal values
    never count as inversions.
    """
    cdef Py_ssize_t width = 1, lo, mid, hi, li, ri, k
    cdef long long inv = 0
    cdef double* src = a
    cdef double* dst = buf
    cdef double* tmp
    while width < n:
        lo = 0
        while lo < n:
            mid = lo + width
            if mid > n:
                mid = n
            hi = lo + 2 * width
            if hi > n:
                hi = n
            li = lo
            ri = mid
            k = lo
            while li < mid and ri < hi:
                if src[ri] < src[li]:
                    inv += mid - li
                    dst[k] = src[ri]
                    ri += 1
                else:
                    dst[k] = src[li]
                    li += 1
                k += 1
            while li < mid:
                dst[k] = src[li]
                li += 1
                k += 1
            while ri < hi:
                dst[k] = src[ri]
                ri += 1
                k += 1
            lo += 2 * width
        tmp = src
        src = dst
        dst = tmp
        width *= 2
    if src != a:
        for k in range(n):
            a[k] = src[k]
    return inv


cdef long long _tie_pairs_sorted(double* a, Py_ssize_t n) nogil:
    """Sum t*(t-1)/2 over runs of equal values in a sorted array."""
    cdef long long pairs = 0, run = 1
    cdef Py_ssize_t k
    for k in range(1, n):
        if a[k] == a[k - 1]:
            run += 1
        else:
            pairs += run * (run - 1) // 2
            run = 1
    pairs += run * (run - 1) // 2
    return pairs


cdef double _tau_from_gathered(
    double* xs, double* ys, double* buf, Py_ssize_t m,
    long long n1, long long n2,
) nogil:
    """Tau-b given xs sorted ascending and ys gathered in xs' stable order.

    Sorts ys within each x-tie run (completing the lexicographic order and
    yielding the joint-tie count n3), then counts discordant pairs as strict
    inversions of the full ys sequence.
    """
    cdef long long n0 = (<long long> m) * (m - 1) // 2
    if n0 - n1 == 0 or n0 - n2 == 0:
        return 0.0
    cdef Py_ssize_t start = 0, k
    cdef long long n3 = 0, dis
    for k in range(1, m + 1):
        if k == m or xs[k] != xs[start]:
            if k - start > 1:
                _merge_count_sort(ys + start, buf, k - start)
                n3 += _tie_pairs_sorted(ys + start, k - start)
            start = k
    dis = _merge_count_sort(ys, buf, m)
    cdef double num = <double> (n0 - n1 - n2 + n3 - 2 * dis)
    return num / sqrt((<double> (n0 - n1)) * (<double> (n0 - n2)))


def tau_pair(double[::1] xs, double[::1] ys, long long n1, long long n2):
    """Tau-b for one pre-sorted pair; ``ys`` is modified in place."""
    cdef Py_ssize_t m = xs.shape[0]
    cdef double* buf = <double*> malloc(m * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef double tau
    try:
        with nogil:
            tau = _tau_from_gathered(&xs[0], &ys[0], buf, m, n1, n2)
    finally:
        free(buf)
    return tau


def tau_block(
    double[:, ::1] cols_t,
    long long[:, ::1] perms,
    long long[::1] tie_pairs,
    double[:, ::1] out,
    Py_ssize_t row_start,
    Py_ssize_t row_end,
):
    """Fill rows [row_start, row_end) of the upper-triangle tau matrix.

    ``cols_t`` is (n_v, m) with one importance column per row; ``perms``
    holds each column's stable ascending argsort and ``tie_pairs`` its
    tie-pair count. Each row writes only out[i, i+1:], so disjoint blocks
    are safe to run concurrently.
    """
    cdef Py_ssize_t n_v = cols_t.shape[0]
    cdef Py_ssize_t m = cols_t.shape[1]
    cdef Py_ssize_t i, j, t
    cdef double* xs = <double*> malloc(m * sizeof(double))
    cdef double* ys = <double*> malloc(m * sizeof(double))
    cdef double* buf = <double*> malloc(m * sizeof(double))
    if xs == NULL or ys == NULL or buf == NULL:
        free(xs)
        free(ys)
        free(buf)
        raise MemoryError()
    try:
        with nogil:
            for i in range(row_start, row_end):
                for t in range(m):
                    xs[t] = cols_t[i, perms[i, t]]
                for j in range(i + 1, n_v):
                    for t in range(m):
                        ys[t] = cols_t[j, perms[i, t]]
                    out[i, j] = _tau_from_gathered(
                        xs, ys, buf, m, tie_pairs[i], tie_pairs[j]
                    )
    finally:
        free(xs)
        free(ys)
        free(buf)


def importance_row(
    double[:, ::1] features,
    long long[::1] labels,
    double[:, ::1] prototypes,
    double eps,
    double cap,
    double[::1] out,
):
    """Per-coordinate episode importance; see the pure twin for the formula."""
    cdef Py_ssize_t big_t = features.shape[0]
    cdef Py_ssize_t n_v = features.shape[1]
    cdef Py_ssize_t n = prototypes.shape[0]
    cdef Py_ssize_t t, d, j, c
    cdef double diff, own_j, num, den, term
    cdef double* total = <double*> malloc(n_v * sizeof(double))
    cdef double* own = <double*> malloc(n_v * sizeof(double))
    cdef double* sums = <double*> malloc(n * n_v * sizeof(double))
    if total == NULL or own == NULL or sums == NULL:
        free(total)
        free(own)
        free(sums)
        raise MemoryError()
    try:
        with nogil:
            for j in range(n * n_v):
                sums[j] = 0.0
            for t in range(big_t):
                c = labels[t]
                for j in range(n_v):
                    total[j] = 0.0
                for d in range(n):
                    if d == c:
                        for j in range(n_v):
                            diff = features[t, j] - prototypes[d, j]
                            own_j = diff * diff
                            own[j] = own_j
                            total[j] += own_j
                    else:
                        for j in range(n_v):
                            diff = features[t, j] - prototypes[d, j]
                            total[j] += diff * diff
                for j in range(n_v):
                    num = total[j] - own[j]
                    den = (n - 1) * (own[j] + eps)
                    term = num / den - 1.0
                    if term < 0.0:
                        term = 0.0
                    elif term > cap:
                        term = cap
                    sums[c * n_v + j] += term
            for j in range(n_v):
                num = 0.0
                for c in range(n):
                    num += sums[c * n_v + j]
                out[j] = num / n
    finally:
        free(total)
        free(own)
        free(sums)


def blended_scores(
    double[:, ::1] queries,
    double[:, ::1] prototypes,
    double[::1] coord_weights,
    double lam,
    double[:, ::1] out,
):
    """out[q, c] = sum_j (1 + lam * w_j) * (queries[q,j] - prototypes[c,j])^2."""
    cdef Py_ssize_t n_q = queries.shape[0]
    cdef Py_ssize_t n_c = prototypes.shape[0]
    cdef Py_ssize_t n_v = queries.shape[1]
    cdef Py_ssize_t q, c, j
    cdef double s, diff
    cdef double* wj = <double*> malloc(n_v * sizeof(double))
    if wj == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(n_v):
                wj[j] = 1.0 + lam * coord_weights[j]
            for q in range(n_q):
                for c in range(n_c):
                    s = 0.0
                    for j in range(n_v):
                        diff = queries[q, j] - prototypes[c, j]
                        s += wj[j] * diff * diff
                    out[q, c] = s
    finally:
        free(wj)

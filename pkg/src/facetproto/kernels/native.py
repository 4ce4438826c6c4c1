"""Adapter giving the compiled extension the same surface as ``pure``."""

from __future__ import annotations

import numpy as np

from . import _native

BACKEND_NAME = "native"


def kendall_tau(x: np.ndarray, y: np.ndarray) -> float:
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    m = x.shape[0]
    if m * (m - 1) // 2 == 0:
        return 0.0
    order = np.argsort(x, kind="stable")
    xs = np.ascontiguousarray(x[order])
    ys = np.ascontiguousarray(y[order])
    n1 = _tie_pair_count(xs)
    n2 = _tie_pair_count(np.sort(y))
    return _native.tau_pair(xs, ys, n1, n2)


def _tie_pair_count(sorted_vals: np.ndarray) -> int:
    if sorted_vals.shape[0] < 2:
        return 0
    boundaries = np.flatnonzero(np.diff(sorted_vals) != 0)
    starts = np.concatenate(([0], boundaries + 1))
    ends = np.concatenate((boundaries + 1, [sorted_vals.shape[0]]))
    runs = ends - starts
    return int(np.sum(runs * (runs - 1) // 2))


def tau_prepare(columns: np.ndarray):
    """Shared state: transposed columns, per-column argsorts and tie counts."""
    cols_t = np.ascontiguousarray(columns.T, dtype=np.float64)
    perms = np.argsort(cols_t, axis=1, kind="stable").astype(np.int64)
    sorted_cols = np.take_along_axis(cols_t, perms, axis=1)
    tie_pairs = np.array(
        [_tie_pair_count(row) for row in sorted_cols], dtype=np.int64
    )
    return cols_t, perms, tie_pairs


def tau_block(state, out: np.ndarray, row_start: int, row_end: int) -> None:
    cols_t, perms, tie_pairs = state
    _native.tau_block(cols_t, perms, tie_pairs, out, row_start, row_end)


def importance_row(
    features: np.ndarray,
    labels: np.ndarray,
    prototypes: np.ndarray,
    eps: float,
    cap: float,
) -> np.ndarray:
    out = np.empty(features.shape[1], dtype=np.float64)
    _native.importance_row(
        np.ascontiguousarray(features, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        np.ascontiguousarray(prototypes, dtype=np.float64),
        eps,
        cap,
        out,
    )
    return out


def blended_scores(
    queries: np.ndarray,
    prototypes: np.ndarray,
    coord_weights: np.ndarray,
    lam: float,
) -> np.ndarray:
    out = np.empty((queries.shape[0], prototypes.shape[0]), dtype=np.float64)
    _native.blended_scores(
        np.ascontiguousarray(queries, dtype=np.float64),
        np.ascontiguousarray(prototypes, dtype=np.float64),
        np.ascontiguousarray(coord_weights, dtype=np.float64),
        lam,
        out,
    )
    return out

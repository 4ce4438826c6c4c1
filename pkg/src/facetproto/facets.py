"""Facet identification: Kendall-tau column similarity and average-link
agglomerative clustering of feature coordinates.

The tie-corrected tau-b variant is used because ReLU-clipped importance
columns carry many tied zeros; a column with no rank information at all
(constant) gets tau = 0 against everything. Clustering runs on the
dissimilarity d = 1 - tau with Lance-Williams average-link updates; ties in
the minimum average dissimilarity break toward the lexicographically
smallest (min-index, min-index) cluster pair, so the merge trace is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data_model import FacetPartition, ImportanceMatrix
from .errors import ConfigurationError, DimensionError, ValidationError
from .kernels import kendall_tau as _kernel_tau
from .kernels import tau_block, tau_prepare
from .parallel import run_blocks

__all__ = [
    "SimilarityMatrix",
    "kendall_tau",
    "build_similarity",
    "agglomerate",
    "agglomerate_trace",
]


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric n_v x n_v matrix of pairwise column correlations in [-1, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1]:
            raise ValidationError(f"similarity matrix must be square, got {vals.shape}")
        if not np.array_equal(vals, vals.T):
            raise ValidationError("similarity matrix must be symmetric")
        if not np.allclose(np.diag(vals), 1.0, rtol=0, atol=0):
            raise ValidationError("similarity diagonal must be 1")
        if np.any(vals < -1) or np.any(vals > 1):
            raise ValidationError("similarity entries must lie in [-1, 1]")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b; 0 when either sequence is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise DimensionError(f"tau needs equal-length 1-D inputs, got {x.shape} vs {y.shape}")
    if x.shape[0] < 2:
        raise DimensionError("tau needs at least 2 observations")
    return _kernel_tau(x, y)


def build_similarity(matrix: ImportanceMatrix, threads: int = 1) -> SimilarityMatrix:
    """Pairwise tau between all columns of the importance matrix."""
    if matrix.rows < 2:
        raise DimensionError("similarity needs an importance matrix with m >= 2")
    n_v = matrix.cols
    out = np.eye(n_v, dtype=np.float64)
    state = tau_prepare(matrix.values)
    run_blocks(lambda lo, hi: tau_block(state, out, lo, hi), n_v, threads)
    upper = np.triu_indices(n_v, k=1)
    out[(upper[1], upper[0])] = out[upper]
    return SimilarityMatrix(values=out)


def agglomerate(sim: SimilarityMatrix, f: int) -> FacetPartition:
    """Cluster coordinates into ``f`` facets by average-link agglomeration."""
    partition, _ = agglomerate_trace(sim, f)
    return partition


def agglomerate_trace(
    sim: SimilarityMatrix, f: int
) -> tuple[FacetPartition, list[tuple[int, int]]]:
    """Like :func:`agglomerate` but also returns the merge trace.

    Each trace entry is the pair of cluster keys merged at that step, where
    a cluster's key is its smallest member index. Starts from singletons and
    merges the minimum-average-dissimilarity pair until ``f`` remain.
    """
    n = sim.n
    if f < 1 or f > n:
        raise ConfigurationError(f"facet count must be in 1..{n}, got {f}")

    # cluster lives in the slot of its smallest member; merging keeps the
    # smaller slot, so slot order equals min-member order and the row-major
    # first-minimum scan realizes the lexicographic tie-break
    d = 1.0 - sim.values
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=np.int64)
    members: list[list[int]] = [[i] for i in range(n)]
    trace: list[tuple[int, int]] = []

    big = np.inf
    work = d.copy()
    np.fill_diagonal(work, big)
    lower = np.tril(np.ones((n, n), dtype=bool))

    remaining = n
    while remaining > f:
        visible = active[:, None] & active[None, :] & ~lower
        masked = np.where(visible, work, big)
        flat = int(np.argmin(masked))  # first minimum row-major
        a, b = divmod(flat, n)
        trace.append((a, b))
        # Lance-Williams average-link update of row/col a
        na, nb = sizes[a], sizes[b]
        merged_row = (na * work[a] + nb * work[b]) / (na + nb)
        work[a] = merged_row
        work[:, a] = merged_row
        work[a, a] = big
        active[b] = False
        sizes[a] = na + nb
        members[a].extend(members[b])
        remaining -= 1

    facets = tuple(tuple(sorted(members[i])) for i in range(n) if active[i])
    return FacetPartition(n_v=n, facets=facets), trace

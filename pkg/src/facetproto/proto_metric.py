"""Prototype construction and the distance kernels.

The blended distance is

    dist(q, c) = ||q - v_c||^2 + lambda * fdist(q, c)

with fdist the facet-weighted sum of block squared distances. At lambda=0
the classifier reduces exactly to plain nearest-prototype.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data_model import Episode, FacetPartition
from .errors import ConfigurationError, DimensionError
from .kernels import blended_scores

__all__ = [
    "Prototype",
    "compute_prototypes",
    "prototype_matrix",
    "sq_euclidean",
    "fdist",
    "blended_dist",
    "classify",
    "batch_classify",
    "validate_weights",
]

_WEIGHT_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Prototype:
    class_index: int
    vector: np.ndarray


def validate_weights(eta: Sequence[float] | np.ndarray, f: int | None = None) -> np.ndarray:
    """Check facet weights: each in [0, 1], summing to 1 within 1e-9."""
    w = np.asarray(eta, dtype=np.float64)
    if w.ndim != 1:
        raise ConfigurationError(f"facet weights must be 1-D, got shape {w.shape}")
    if f is not None and w.shape[0] != f:
        raise ConfigurationError(f"expected {f} facet weights, got {w.shape[0]}")
    if np.any(w < 0) or np.any(w > 1):
        raise ConfigurationError("facet weights must lie in [0, 1]")
    if abs(float(w.sum()) - 1.0) > _WEIGHT_SUM_TOL:
        raise ConfigurationError(f"facet weights sum to {w.sum()!r}, expected 1")
    return w


def prototype_matrix(episode: Episode) -> np.ndarray:
    """Per-class mean of the support features, shape (N, n_v)."""
    n = episode.n_way
    protos = np.empty((n, episode.n_v), dtype=np.float64)
    for c in range(n):
        protos[c] = episode.support_x[episode.support_y == c].mean(axis=0)
    return protos


def compute_prototypes(episode: Episode) -> list[Prototype]:
    """Class prototypes: the mean of each class's K support features."""
    mat = prototype_matrix(episode)
    return [Prototype(c, mat[c]) for c in range(episode.n_way)]


def _vec(v: np.ndarray | Prototype) -> np.ndarray:
    if isinstance(v, Prototype):
        v = v.vector
    return np.asarray(v, dtype=np.float64)


def sq_euclidean(a: np.ndarray, b: np.ndarray | Prototype) -> float:
    """Squared Euclidean distance, accumulated in double precision."""
    a = _vec(a)
    b = _vec(b)
    if a.shape != b.shape:
        raise DimensionError(f"length mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.dot(d, d))


def fdist(
    query: np.ndarray,
    proto: np.ndarray | Prototype,
    partition: FacetPartition,
    eta: Sequence[float] | np.ndarray,
) -> float:
    """Weighted sum over facets of the block squared distances."""
    q = _vec(query)
    p = _vec(proto)
    if q.shape != p.shape:
        raise DimensionError(f"length mismatch: {q.shape} vs {p.shape}")
    if q.shape[0] != partition.n_v:
        raise ConfigurationError(
            f"partition covers {partition.n_v} coordinates, vectors have {q.shape[0]}"
        )
    w = validate_weights(eta, partition.f)
    d = q - p
    sq = d * d
    return float(sum(w[i] * sq[list(fac)].sum() for i, fac in enumerate(partition.facets)))


def blended_dist(
    query: np.ndarray,
    proto: np.ndarray | Prototype,
    partition: FacetPartition,
    eta: Sequence[float] | np.ndarray,
    lam: float,
) -> float:
    """Plain squared Euclidean plus lambda times the facet distance."""
    if lam < 0:
        raise ConfigurationError(f"lambda must be >= 0, got {lam}")
    return sq_euclidean(query, proto) + lam * fdist(query, proto, partition, eta)


def classify(
    query: np.ndarray,
    prototypes: Sequence[Prototype],
    partition: FacetPartition,
    eta: Sequence[float] | np.ndarray,
    lam: float,
) -> int:
    """Index of the nearest prototype under the blended distance.

    Ties break toward the lowest class_index.
    """
    if not prototypes:
        raise ConfigurationError("classify needs at least one prototype")
    if lam < 0:
        raise ConfigurationError(f"lambda must be >= 0, got {lam}")
    w = validate_weights(eta, partition.f)
    ordered = sorted(prototypes, key=lambda p: p.class_index)
    protos = np.stack([_vec(p) for p in ordered])
    scores = blended_scores(
        _vec(query)[None, :], protos, partition.coordinate_weights(w), lam
    )[0]
    # first minimum, after sorting, is the lowest class_index
    return ordered[int(np.argmin(scores))].class_index


def batch_classify(
    queries: np.ndarray,
    protos: np.ndarray,
    partition: FacetPartition,
    eta: np.ndarray,
    lam: float,
) -> np.ndarray:
    """Argmin class indices for a query matrix; the eval-loop fast path."""
    scores = blended_scores(queries, protos, partition.coordinate_weights(eta), lam)
    return np.argmin(scores, axis=1)

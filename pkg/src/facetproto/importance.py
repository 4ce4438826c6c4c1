"""Per-coordinate discriminative importance and the episode matrix.

For an example x of class c and coordinate i, the contribution is

    ReLU( mean_{d != c} (x[i] - v_d[i])^2 / ((x[i] - v_c[i])^2 + eps) - 1 )

summed over all support and query examples of c, averaged over the N
classes. The eps guard and the per-term cap exist because a 1-shot support
example coincides with its own prototype, making the raw denominator
exactly zero. Capping per term is rank-safe for the Kendall statistic
downstream: 1-shot support terms become a constant CAP offset per class.
The summed entries are deliberately not clipped again, so that offset can
never mask the variation the ranks carry.
"""

from __future__ import annotations

import numpy as np

from .data_model import Episode, FeatureBank, ImportanceMatrix, RunConfig
from .episodes import episode_stream
from .kernels import importance_row
from .parallel import map_indexed

__all__ = [
    "EPS",
    "TERM_CAP",
    "coordinate_importance_class",
    "coordinate_importance_episode",
    "episode_importance",
    "build_importance_matrix",
]

EPS = 1e-12
TERM_CAP = 1e6


def _episode_examples(episode: Episode) -> tuple[np.ndarray, np.ndarray]:
    """All labelled examples of the episode: support then query."""
    x = np.concatenate([episode.support_x, episode.query_x], axis=0)
    y = np.concatenate([episode.support_y, episode.query_y], axis=0)
    return x, y


def coordinate_importance_class(
    episode: Episode, prototypes: np.ndarray, class_index: int, coord: int
) -> float:
    """Importance of one coordinate for one class (scalar reference path)."""
    x, y = _episode_examples(episode)
    n = prototypes.shape[0]
    total = 0.0
    for t in range(x.shape[0]):
        if int(y[t]) != class_index:
            continue
        v = x[t, coord]
        own = (v - prototypes[class_index, coord]) ** 2
        other = sum(
            (v - prototypes[d, coord]) ** 2 for d in range(n) if d != class_index
        )
        term = other / ((n - 1) * (own + EPS)) - 1.0
        total += min(max(term, 0.0), TERM_CAP)
    return total


def coordinate_importance_episode(
    episode: Episode, prototypes: np.ndarray, coord: int
) -> float:
    """Mean over classes of the per-class coordinate importance."""
    n = prototypes.shape[0]
    return sum(
        coordinate_importance_class(episode, prototypes, c, coord) for c in range(n)
    ) / n


def episode_importance(episode: Episode, prototypes: np.ndarray) -> np.ndarray:
    """Importance of every coordinate for one episode (kernel fast path)."""
    x, y = _episode_examples(episode)
    return importance_row(x, y, prototypes, EPS, TERM_CAP)


def build_importance_matrix(
    bank: FeatureBank, config: RunConfig, threads: int = 1
) -> ImportanceMatrix:
    """Row j holds the coordinate importances of the j-th streamed episode."""
    from .proto_metric import prototype_matrix

    episodes = list(episode_stream(bank, config, count=config.m_importance))

    def one_row(ep: Episode) -> np.ndarray:
        return episode_importance(ep, prototype_matrix(ep))

    rows = map_indexed(one_row, episodes, threads)
    return ImportanceMatrix(values=np.stack(rows))

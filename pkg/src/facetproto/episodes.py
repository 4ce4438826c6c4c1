"""Deterministic N-way K-shot episode sampling.

Sampling is order-stable and fully seeded: classes are chosen by shuffling
the sorted class-id list, images by shuffling each class's sorted image-id
list, both with the xoshiro256** generator from :mod:`facetproto.rng`.
Episode ``j`` of a stream uses ``mix(seed, j)``, so (bank, seed) maps to an
identical episode sequence on every run and platform.
"""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .data_model import Episode, FeatureBank, RunConfig
from .errors import CapacityError
from .rng import Xoshiro256StarStar, mix

__all__ = ["sample_episode", "episode_stream"]


def sample_episode(bank: FeatureBank, n: int, k: int, q: int, rng_seed: int) -> Episode:
    """Sample one episode; bit-identical for identical inputs.

    Raises CapacityError when the bank has fewer than ``n`` classes or a
    sampled class has fewer than ``k + q`` images.
    """
    class_ids = bank.class_ids()
    if len(class_ids) < n:
        raise CapacityError(
            f"bank has {len(class_ids)} classes, episode needs {n}"
        )
    rng = Xoshiro256StarStar(rng_seed)
    rng.shuffle(class_ids)
    chosen = class_ids[:n]

    support_x, support_y, support_ids = [], [], []
    query_x, query_y, query_ids = [], [], []
    for ci, class_id in enumerate(chosen):
        records = sorted(bank.records_of(class_id), key=lambda r: r.image_id)
        if len(records) < k + q:
            raise CapacityError(
                f"class {class_id!r} has {len(records)} images, episode needs {k + q}"
            )
        rng.shuffle(records)
        for rec in records[:k]:
            support_x.append(rec.features)
            support_y.append(ci)
            support_ids.append(rec.image_id)
        for rec in records[k : k + q]:
            query_x.append(rec.features)
            query_y.append(ci)
            query_ids.append(rec.image_id)

    return Episode(
        classes=tuple(chosen),
        support_x=np.array(support_x, dtype=np.float64),
        support_y=np.array(support_y, dtype=np.int64),
        query_x=np.array(query_x, dtype=np.float64),
        query_y=np.array(query_y, dtype=np.int64),
        support_image_ids=tuple(support_ids),
        query_image_ids=tuple(query_ids),
    )


def episode_stream(
    bank: FeatureBank, config: RunConfig, count: int | None = None
) -> Iterator[Episode]:
    """Yield ``count`` episodes (default ``config.episodes``).

    Episode j is seeded with ``mix(config.seed, j)``, so any episode can be
    regenerated independently by index.
    """
    total = config.episodes if count is None else count
    for j in range(total):
        yield sample_episode(
            bank, config.n_way, config.k_shot, config.q_query, mix(config.seed, j)
        )

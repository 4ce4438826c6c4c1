import numpy as np
import pytest

from facetproto.data_model import (
    BankRecord,
    ClassEmbedding,
    Episode,
    FacetPartition,
    FeatureBank,
)
from facetproto.rng import Xoshiro256StarStar


def make_bank(
    n_classes: int = 4,
    per_class: int = 8,
    dim: int = 6,
    seed: int = 123,
    prefix: str = "cls",
) -> FeatureBank:
    """Small dense bank with gaussian features; fully deterministic."""
    rng = Xoshiro256StarStar(seed)
    records = []
    for c in range(n_classes):
        for r in range(per_class):
            records.append(
                BankRecord(
                    class_id=f"{prefix}{c}",
                    image_id=f"{prefix}{c}_img{r:03d}",
                    features=np.array([rng.normal() for _ in range(dim)]),
                )
            )
    return FeatureBank(dim=dim, records=tuple(records))


def make_episode(
    n: int = 3, k: int = 2, q: int = 4, n_v: int = 6, seed: int = 5
) -> Episode:
    rng = Xoshiro256StarStar(seed)
    classes = tuple(f"c{i}" for i in range(n))
    sup = np.array([[rng.normal() for _ in range(n_v)] for _ in range(n * k)])
    qry = np.array([[rng.normal() for _ in range(n_v)] for _ in range(n * q)])
    return Episode(
        classes=classes,
        support_x=sup,
        support_y=np.repeat(np.arange(n), k),
        query_x=qry,
        query_y=np.repeat(np.arange(n), q),
        support_image_ids=tuple(f"s{i}" for i in range(n * k)),
        query_image_ids=tuple(f"q{i}" for i in range(n * q)),
    )


def make_embeddings(classes, d_w: int = 4, seed: int = 9):
    rng = Xoshiro256StarStar(seed)
    return {
        c: ClassEmbedding(class_id=c, vector=np.array([rng.normal() for _ in range(d_w)]))
        for c in classes
    }


@pytest.fixture
def small_bank() -> FeatureBank:
    return make_bank()


@pytest.fixture
def episode() -> Episode:
    return make_episode()


@pytest.fixture
def even_partition() -> FacetPartition:
    return FacetPartition(n_v=6, facets=((0, 1), (2, 3), (4, 5)))

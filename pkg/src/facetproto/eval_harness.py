"""Episodic evaluation, paired run comparison, and the planted-facet
synthetic generator the acceptance tests run on.

Accuracy is reported as mean over episodes with a 95% confidence interval
(1.96 times the sample standard deviation over the square root of the
episode count). Episodes may be scored in parallel; accuracies are gathered
by episode index so the report never depends on the thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .data_model import (
    BankRecord,
    ClassEmbedding,
    Episode,
    FacetPartition,
    FeatureBank,
    RunConfig,
)
from .episodes import episode_stream
from .errors import (
    ConfigurationError,
    MissingEmbeddingError,
    PairingError,
    ValidationError,
)
from .parallel import map_indexed, resolve_threads
from .proto_metric import prototype_matrix
from .rng import Xoshiro256StarStar, mix
from .weight_net import (
    GateParams,
    _episode_embedding_matrix,
    class_weights,
    episode_weights,
)

__all__ = [
    "EvalReport",
    "RunComparison",
    "episode_predictions",
    "episode_accuracy",
    "evaluate",
    "evaluate_protonet",
    "compare_runs",
    "format_report",
    "serialize_results",
    "write_results",
    "generate_synthetic",
]

# stream tags keep feature noise, embedding noise, and signal patterns
# on provably distinct PRNG streams
_FEATURE_STREAM = 0
_EMBEDDING_STREAM = 1
_PATTERN_SALT = 0x5F41434554  # pattern streams are bank-seed independent


@dataclass(frozen=True)
class EvalReport:
    """Accuracy over E episodes; mean and CI are recomputable from the list."""

    episodes: int
    mean_accuracy: float
    ci95: float
    per_episode_accuracies: tuple[float, ...]
    seed: int

    def __post_init__(self):
        accs = self.per_episode_accuracies
        if self.episodes != len(accs) or self.episodes < 1:
            raise ValidationError(
                f"episode count {self.episodes} does not match {len(accs)} accuracies"
            )
        if any(not (0.0 <= a <= 1.0) for a in accs):
            raise ValidationError("per-episode accuracies must lie in [0, 1]")
        if abs(self.mean_accuracy - float(np.mean(accs))) > 1e-12:
            raise ValidationError("mean_accuracy does not match the per-episode list")
        if abs(self.ci95 - _ci95(accs)) > 1e-12:
            raise ValidationError("ci95 does not match the per-episode list")

    @classmethod
    def from_accuracies(cls, accs: Sequence[float], seed: int) -> "EvalReport":
        accs = tuple(float(a) for a in accs)
        return cls(
            episodes=len(accs),
            mean_accuracy=float(np.mean(accs)),
            ci95=_ci95(accs),
            per_episode_accuracies=accs,
            seed=seed,
        )


def _ci95(accs: Sequence[float]) -> float:
    # sample stddev; a single episode has no spread estimate
    if len(accs) < 2:
        return 0.0
    return float(1.96 * np.std(accs, ddof=1) / np.sqrt(len(accs)))


@dataclass(frozen=True)
class RunComparison:
    """Paired per-episode accuracy difference (a minus b)."""

    episodes: int
    mean_difference: float
    ci95: float
    per_episode_differences: tuple[float, ...]


def episode_predictions(
    episode: Episode,
    coord_weights: np.ndarray | None = None,
    lam: float = 0.0,
) -> np.ndarray:
    """Predicted class indices for every query; ties go to the lowest index.

    With no weights (or lam = 0) this is plain nearest-prototype.
    """
    protos = prototype_matrix(episode)
    if coord_weights is None:
        coord_weights = np.zeros(episode.n_v)
    scores = kernels.blended_scores(episode.query_x, protos, coord_weights, lam)
    return np.argmin(scores, axis=1)


def episode_accuracy(
    episode: Episode,
    coord_weights: np.ndarray | None = None,
    lam: float = 0.0,
) -> float:
    preds = episode_predictions(episode, coord_weights, lam)
    return float(np.mean(preds == episode.query_y))


def _per_class_accuracy(
    episode: Episode,
    gate: GateParams,
    embeddings: Mapping[str, ClassEmbedding],
    partition: FacetPartition,
    lam: float,
) -> float:
    # variant: each prototype is scored with its own class's facet weights
    # instead of the episode average
    emb = _episode_embedding_matrix(episode, embeddings)
    per_class = np.stack([class_weights(gate, e) for e in emb])  # (N, F)
    coord = np.stack([partition.coordinate_weights(w) for w in per_class])  # (N, n_v)
    protos = prototype_matrix(episode)
    diff = episode.query_x[:, None, :] - protos[None, :, :]
    sq = diff * diff
    scores = sq.sum(axis=2) + lam * np.einsum("qci,ci->qc", sq, coord)
    preds = np.argmin(scores, axis=1)
    return float(np.mean(preds == episode.query_y))


def evaluate(
    bank: FeatureBank,
    embeddings: Mapping[str, ClassEmbedding],
    partition: FacetPartition,
    gate: GateParams,
    config: RunConfig,
    threads: int | None = None,
    per_class_weights: bool = False,
) -> EvalReport:
    """Score config.episodes episodes with the facet-blended classifier."""
    episodes = list(episode_stream(bank, config))

    if per_class_weights:
        def score(ep: Episode) -> float:
            return _per_class_accuracy(ep, gate, embeddings, partition, config.lam)
    else:
        def score(ep: Episode) -> float:
            eta = episode_weights(gate, [_lookup(embeddings, c) for c in ep.classes])
            coord = partition.coordinate_weights(eta)
            return episode_accuracy(ep, coord, config.lam)

    accs = map_indexed(score, episodes, resolve_threads(threads))
    return EvalReport.from_accuracies(accs, seed=config.seed)


def evaluate_protonet(
    bank: FeatureBank, config: RunConfig, threads: int | None = None
) -> EvalReport:
    """Gate-free plain nearest-prototype reference on the same episode stream."""
    episodes = list(episode_stream(bank, config))
    accs = map_indexed(episode_accuracy, episodes, resolve_threads(threads))
    return EvalReport.from_accuracies(accs, seed=config.seed)


def _lookup(embeddings: Mapping[str, ClassEmbedding], class_id: str) -> ClassEmbedding:
    if class_id not in embeddings:
        raise MissingEmbeddingError(class_id)
    return embeddings[class_id]


def compare_runs(report_a: EvalReport, report_b: EvalReport) -> RunComparison:
    """Paired episode-by-episode difference; requires matching streams."""
    if report_a.episodes != report_b.episodes:
        raise PairingError(
            f"episode counts differ: {report_a.episodes} vs {report_b.episodes}"
        )
    if report_a.seed != report_b.seed:
        raise PairingError(f"seeds differ: {report_a.seed} vs {report_b.seed}")
    diffs = tuple(
        a - b
        for a, b in zip(report_a.per_episode_accuracies, report_b.per_episode_accuracies)
    )
    return RunComparison(
        episodes=len(diffs),
        mean_difference=float(np.mean(diffs)),
        ci95=_ci95(diffs),
        per_episode_differences=diffs,
    )


def format_report(report: EvalReport) -> str:
    """Human-readable summary; percentages with two decimals."""
    return (
        f"episodes: {report.episodes}\n"
        f"seed: {report.seed}\n"
        f"accuracy: {100.0 * report.mean_accuracy:.2f} ± {100.0 * report.ci95:.2f}\n"
    )


def serialize_results(report: EvalReport) -> str:
    """Tab-separated per-episode accuracies: episode_index, accuracy."""
    lines = [f"#episodes={report.episodes} seed={report.seed}"]
    lines.extend(
        f"{i}\t{repr(float(a))}" for i, a in enumerate(report.per_episode_accuracies)
    )
    return "\n".join(lines) + "\n"


def write_results(report: EvalReport, path) -> None:
    Path(path).write_text(serialize_results(report), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# planted-facet synthetic generator
# ---------------------------------------------------------------------------


def _facet_pattern(facet_index: int, pattern_key: int, size: int, delta: float) -> np.ndarray:
    """Sign pattern of norm delta; identical (facet, key) pairs share it."""
    rng = Xoshiro256StarStar(mix(mix(_PATTERN_SALT, facet_index), pattern_key))
    signs = np.array([1.0 if rng.next_u64() & 1 else -1.0 for _ in range(size)])
    return signs * (delta / np.sqrt(size))


def generate_synthetic(
    n_classes: int,
    per_class: int,
    n_v: int,
    planted_partition: FacetPartition,
    class_facet_signal: Sequence[int | tuple[int, int]],
    noise_sigma: float,
    seed: int,
    class_prefix: str = "class",
    embedding_noise: float = 0.05,
    signal_delta: float = 1.0,
    coordinate_jitter: float = 0.05,
) -> tuple[FeatureBank, dict[str, ClassEmbedding]]:
    """Bank whose class means live on single facets, plus matching embeddings.

    Each class's mean is a sign pattern of norm signal_delta on its assigned
    facet's coordinates and zero elsewhere. An entry of class_facet_signal is
    either a facet index (the class gets its own pattern) or a
    (facet_index, pattern_key) pair; classes sharing a pair share the exact
    mean. Noise is block-coherent: every example draws one gaussian nuisance
    scalar of scale noise_sigma per planted facet, added to all of that
    facet's coordinates, plus independent per-coordinate jitter at
    coordinate_jitter times noise_sigma. Coordinates of a facet therefore
    rise and fall together, which is the co-variation the facet-discovery
    stage is built to detect. Embeddings are one-hot facet indicators plus
    small noise, so a gate can read the facet off them. Everything is
    deterministic in the seed.
    """
    if planted_partition.n_v != n_v:
        raise ConfigurationError(
            f"partition covers {planted_partition.n_v} coordinates, bank has {n_v}"
        )
    if len(class_facet_signal) != n_classes:
        raise ConfigurationError(
            f"got {len(class_facet_signal)} facet assignments for {n_classes} classes"
        )
    if n_classes < 2 or per_class < 1:
        raise ConfigurationError("need at least 2 classes and 1 example per class")
    if min(noise_sigma, embedding_noise, signal_delta, coordinate_jitter) < 0:
        raise ConfigurationError("scales must be non-negative")

    f = planted_partition.f
    width = len(str(n_classes - 1))
    feat_rng = Xoshiro256StarStar(mix(seed, _FEATURE_STREAM))
    emb_rng = Xoshiro256StarStar(mix(seed, _EMBEDDING_STREAM))

    records = []
    embeddings: dict[str, ClassEmbedding] = {}
    for ci, assignment in enumerate(class_facet_signal):
        if isinstance(assignment, tuple):
            facet_index, pattern_key = assignment
        else:
            facet_index, pattern_key = int(assignment), ci
        if not (0 <= facet_index < f):
            raise ConfigurationError(
                f"facet index {facet_index} out of range for {f} facets"
            )
        class_id = f"{class_prefix}{ci:0{width}d}"
        block = planted_partition.facets[facet_index]
        mean = np.zeros(n_v)
        mean[list(block)] = _facet_pattern(facet_index, pattern_key, len(block), signal_delta)
        jitter_sigma = coordinate_jitter * noise_sigma
        for ri in range(per_class):
            features = mean.copy()
            for fac in planted_partition.facets:
                features[list(fac)] += noise_sigma * feat_rng.normal()
            features += jitter_sigma * np.array([feat_rng.normal() for _ in range(n_v)])
            records.append(
                BankRecord(
                    class_id=class_id,
                    image_id=f"{class_id}_{ri:04d}",
                    features=features,
                )
            )
        vec = np.zeros(f)
        vec[facet_index] = 1.0
        vec += embedding_noise * np.array([emb_rng.normal() for _ in range(f)])
        embeddings[class_id] = ClassEmbedding(class_id=class_id, vector=vec)

    return FeatureBank(dim=n_v, records=tuple(records)), embeddings

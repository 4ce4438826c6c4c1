"""The facet-importance gate: an affine map from class-name embeddings to
pre-softmax facet scores, trained episodically against the blended-distance
classifier.

The gate is deliberately a single affine layer (few-shot regimes punish
extra parameters). Training minimizes softmax cross-entropy where a query's
logit for class c is the negative blended distance to prototype c; only the
gate parameters move, the features stay frozen, and the gradient flows
analytically through the facet distance, the per-class softmax, and the
episode average of the weights.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data_model import ClassEmbedding, Episode, FacetPartition, FeatureBank, RunConfig
from .episodes import episode_stream
from .errors import ConfigurationError, MissingEmbeddingError, ParseError, ValidationError
from .proto_metric import prototype_matrix
from .rng import Xoshiro256StarStar

__all__ = [
    "GateParams",
    "GateConfig",
    "gate_forward",
    "class_weights",
    "episode_weights",
    "episode_loss_and_grads",
    "init_gate",
    "train_gate",
    "parse_gate_params",
    "serialize_gate_params",
    "write_gate_params",
]

# distinguishes the parameter-init stream from episode streams on the same seed
_INIT_STREAM_TAG = 0x67617465


@dataclass(frozen=True)
class GateParams:
    """Affine gate: weight matrix (F, d_w) and bias (F,)."""

    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.array(self.weight, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ValidationError(f"inconsistent gate shapes {w.shape} / {b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValidationError("gate parameters must be finite")
        w.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def f(self) -> int:
        return self.weight.shape[0]

    @property
    def d_w(self) -> int:
        return self.weight.shape[1]


@dataclass(frozen=True)
class GateConfig:
    learning_rate: float = 0.01
    train_episodes: int = 10000
    init_scale: float = 0.01

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.train_episodes < 0 or self.init_scale < 0:
            raise ConfigurationError("train_episodes and init_scale must be >= 0")


def gate_forward(params: GateParams, embedding: ClassEmbedding | np.ndarray) -> np.ndarray:
    """Pre-softmax facet scores W @ n_c + b."""
    vec = embedding.vector if isinstance(embedding, ClassEmbedding) else np.asarray(embedding)
    if vec.shape[0] != params.d_w:
        raise ConfigurationError(
            f"embedding width {vec.shape[0]} does not match gate d_w {params.d_w}"
        )
    return params.weight @ vec + params.bias


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def class_weights(params: GateParams, embedding: ClassEmbedding | np.ndarray) -> np.ndarray:
    """Per-class facet weights: softmax of the gate scores."""
    return _softmax(gate_forward(params, embedding))


def episode_weights(
    params: GateParams,
    embeddings: Sequence[ClassEmbedding | np.ndarray] | Mapping[str, ClassEmbedding],
    classes: Sequence[str] | None = None,
) -> np.ndarray:
    """Componentwise mean of the per-class weight vectors; still sums to 1.

    Pass either the episode's embeddings directly, or an embedding store
    plus the episode's class ids; the latter raises when a class is absent.
    """
    if classes is not None:
        store: Mapping[str, ClassEmbedding] = embeddings  # type: ignore[assignment]
        resolved = []
        for class_id in classes:
            if class_id not in store:
                raise MissingEmbeddingError(class_id)
            resolved.append(store[class_id])
        embeddings = resolved
    if not embeddings:
        raise ConfigurationError("episode_weights needs at least one embedding")
    stacked = np.stack([class_weights(params, e) for e in embeddings])
    return stacked.mean(axis=0)


def _episode_embedding_matrix(
    episode: Episode, embeddings: Mapping[str, ClassEmbedding]
) -> np.ndarray:
    rows = []
    for class_id in episode.classes:
        if class_id not in embeddings:
            raise MissingEmbeddingError(class_id)
        rows.append(embeddings[class_id].vector)
    return np.stack(rows)


def _block_distances(
    queries: np.ndarray, protos: np.ndarray, partition: FacetPartition
) -> np.ndarray:
    """Squared distance per facet block, shape (Tq, N, F)."""
    diff = queries[:, None, :] - protos[None, :, :]
    sq = diff * diff
    blocks = np.empty((queries.shape[0], protos.shape[0], partition.f))
    for fi, fac in enumerate(partition.facets):
        blocks[:, :, fi] = sq[:, :, list(fac)].sum(axis=2)
    return blocks


def episode_loss_and_grads(
    params: GateParams,
    episode: Episode,
    embeddings: Mapping[str, ClassEmbedding],
    partition: FacetPartition,
    lam: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy loss of one episode and its gate gradients.

    Query logits over the episode's classes are the negative blended
    distances; returns (loss, dW, db).
    """
    emb = _episode_embedding_matrix(episode, embeddings)  # (N, d_w)
    protos = prototype_matrix(episode)
    n = episode.n_way

    z = emb @ params.weight.T + params.bias  # (N, F)
    sigma = _softmax(z)  # per-class weights
    eta = sigma.mean(axis=0)  # (F,)

    blocks = _block_distances(episode.query_x, protos, partition)  # (Tq, N, F)
    eu = blocks.sum(axis=2)  # (Tq, N)
    logits = -(eu + lam * blocks @ eta)
    p = _softmax(logits)
    tq = episode.query_x.shape[0]
    loss = -float(np.mean(np.log(p[np.arange(tq), episode.query_y])))

    dlogits = p.copy()
    dlogits[np.arange(tq), episode.query_y] -= 1.0
    dlogits /= tq
    # d loss / d eta_i = sum_{q,c} dlogits[q,c] * (-lam * blocks[q,c,i])
    deta = -lam * np.einsum("qc,qci->i", dlogits, blocks)
    dsigma = deta / n  # identical for every class
    # softmax backward per class row
    dz = sigma * (dsigma[None, :] - (sigma * dsigma[None, :]).sum(axis=1, keepdims=True))
    dw = dz.T @ emb
    db = dz.sum(axis=0)
    return loss, dw, db


def init_gate(f: int, d_w: int, seed: int, init_scale: float = 0.01) -> GateParams:
    """Uniform(-init_scale, init_scale) init from the pinned PRNG."""
    rng = Xoshiro256StarStar(seed ^ _INIT_STREAM_TAG)
    w = np.array(
        [[(2.0 * rng.uniform() - 1.0) * init_scale for _ in range(d_w)] for _ in range(f)]
    )
    b = np.array([(2.0 * rng.uniform() - 1.0) * init_scale for _ in range(f)])
    return GateParams(weight=w, bias=b)


def train_gate(
    bank: FeatureBank,
    embeddings: Mapping[str, ClassEmbedding],
    partition: FacetPartition,
    config: RunConfig,
    gate_config: GateConfig = GateConfig(),
) -> GateParams:
    """Episodic SGD over the gate parameters; deterministic given seeds."""
    widths = {e.vector.shape[0] for e in embeddings.values()}
    if len(widths) != 1:
        raise ValidationError(f"embeddings carry mixed widths {sorted(widths)}")
    d_w = widths.pop()
    params = init_gate(partition.f, d_w, config.seed, gate_config.init_scale)
    w = params.weight.copy()
    b = params.bias.copy()
    lr = gate_config.learning_rate
    for episode in episode_stream(bank, config, count=gate_config.train_episodes):
        current = GateParams(weight=w, bias=b)
        _, dw, db = episode_loss_and_grads(
            current, episode, embeddings, partition, config.lam
        )
        w -= lr * dw
        b -= lr * db
    return GateParams(weight=w, bias=b)


# ---------------------------------------------------------------------------
# gate parameter file format: '#f=<F> dw=<d_w>', F rows of W, one row of b
# ---------------------------------------------------------------------------

_GATE_HEADER = re.compile(r"^#f=(\d+) dw=(\d+)$")


def parse_gate_params(path) -> GateParams:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(path, 1, "empty file, expected '#f=<F> dw=<d_w>' header")
    m = _GATE_HEADER.match(lines[0].strip())
    if not m:
        raise ParseError(path, 1, f"expected '#f=<F> dw=<d_w>' header, got {lines[0]!r}")
    f, d_w = int(m.group(1)), int(m.group(2))
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            vals = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise ParseError(path, line_no, "non-numeric value") from None
        # first f rows are W (d_w wide), the next is b (f wide)
        want = d_w if len(rows) < f else f
        if len(vals) != want:
            raise ParseError(path, line_no, f"expected {want} values, got {len(vals)}")
        rows.append(vals)
    if len(rows) != f + 1:
        raise ParseError(path, len(lines), f"expected {f} weight rows plus bias, got {len(rows)}")
    weight = np.array(rows[:f], dtype=np.float64)
    bias = np.array(rows[f], dtype=np.float64)
    return GateParams(weight=weight, bias=bias)


def serialize_gate_params(params: GateParams) -> str:
    def fmt_row(vals):
        return ",".join(repr(float(v)) for v in vals)

    out = [f"#f={params.f} dw={params.d_w}"]
    out.extend(fmt_row(row) for row in params.weight)
    out.append(fmt_row(params.bias))
    return "\n".join(out) + "\n"


def write_gate_params(params: GateParams, path) -> None:
    Path(path).write_text(serialize_gate_params(params), encoding="utf-8", newline="\n")

"""Core domain types and the portable text file formats.

All four formats are tab-separated text with comma-joined floats:

* feature bank:       ``#dim=<n_v>`` header, then ``class_id<TAB>image_id<TAB>f1,f2,...``
* class embeddings:   ``class_id<TAB>d_w<TAB>e1,...,ed_w`` (no header)
* importance matrix:  ``#rows=<m> cols=<n_v>`` header, then one comma-joined row per line
* facet partition:    ``#nv=<n_v> f=<F>`` header, then ``facet_id<TAB>i1,i2,...``

Floats are written with Python's shortest round-trip ``repr``, so
serialize(parse(file)) is byte-identical for canonical files. Parsers skip
blank lines and ``#`` comment lines beyond the mandatory header; serializers
never emit either, which is what makes a file canonical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DimensionError,
    DuplicateRecordError,
    ParseError,
    ValidationError,
)

__all__ = [
    "BankRecord",
    "FeatureBank",
    "ClassEmbedding",
    "Episode",
    "ImportanceMatrix",
    "FacetPartition",
    "RunConfig",
    "as_feature_vector",
    "parse_feature_bank",
    "serialize_feature_bank",
    "write_feature_bank",
    "parse_class_embeddings",
    "serialize_class_embeddings",
    "write_class_embeddings",
    "parse_importance_matrix",
    "serialize_importance_matrix",
    "write_importance_matrix",
    "parse_facet_partition",
    "serialize_facet_partition",
    "write_facet_partition",
]


def _fmt(x: float) -> str:
    # repr() of a Python float is the shortest string that round-trips.
    return repr(float(x))


def _fmt_row(values: Iterable[float]) -> str:
    return ",".join(_fmt(v) for v in values)


def as_feature_vector(values: Sequence[float] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate *values* as a finite 1-D float64 feature vector."""
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionError(f"feature vector must be 1-D, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionError(f"feature vector has length {vec.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(vec)):
        raise ValidationError("feature vector contains non-finite entries")
    return vec


@dataclass(frozen=True)
class BankRecord:
    class_id: str
    image_id: str
    features: np.ndarray


@dataclass(frozen=True)
class FeatureBank:
    """Immutable store of labeled visual feature vectors."""

    dim: int
    records: tuple[BankRecord, ...]
    _by_class: dict[str, list[BankRecord]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError(f"bank dim must be positive, got {self.dim}")
        object.__setattr__(self, "records", tuple(self.records))
        seen: set[tuple[str, str]] = set()
        by_class: dict[str, list[BankRecord]] = {}
        for rec in self.records:
            # copy so freezing never touches a caller-owned array
            vec = as_feature_vector(np.array(rec.features, dtype=np.float64), self.dim)
            vec.flags.writeable = False
            object.__setattr__(rec, "features", vec)
            key = (rec.class_id, rec.image_id)
            if key in seen:
                raise ValidationError(f"duplicate record {key!r} in bank")
            seen.add(key)
            by_class.setdefault(rec.class_id, []).append(rec)
        if len(by_class) < 2:
            raise ValidationError("bank needs at least 2 distinct class_ids")
        object.__setattr__(self, "_by_class", by_class)

    def class_ids(self) -> list[str]:
        """Distinct class ids in sorted order."""
        return sorted(self._by_class)

    def records_of(self, class_id: str) -> list[BankRecord]:
        return list(self._by_class[class_id])

    def class_size(self, class_id: str) -> int:
        return len(self._by_class[class_id])


@dataclass(frozen=True)
class ClassEmbedding:
    class_id: str
    vector: np.ndarray

    def __post_init__(self):
        vec = np.array(self.vector, dtype=np.float64)
        if vec.ndim != 1 or not np.all(np.isfinite(vec)):
            raise ValidationError(f"embedding for {self.class_id!r} must be a finite 1-D vector")
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)


@dataclass(frozen=True)
class Episode:
    """One N-way K-shot sample: support and query features with class indices."""

    classes: tuple[str, ...]
    support_x: np.ndarray  # (N*K, n_v)
    support_y: np.ndarray  # (N*K,) int64 class indices
    query_x: np.ndarray  # (N*Q, n_v)
    query_y: np.ndarray  # (N*Q,)
    support_image_ids: tuple[str, ...]
    query_image_ids: tuple[str, ...]

    def __post_init__(self):
        n = len(self.classes)
        if n < 1:
            raise ValidationError("episode needs at least one class")
        if self.support_x.shape[0] % n or self.query_x.shape[0] % n:
            raise ValidationError("support/query sizes must be multiples of N")
        counts_s = np.bincount(self.support_y, minlength=n)
        counts_q = np.bincount(self.query_y, minlength=n)
        if len(set(counts_s)) != 1 or len(set(counts_q)) != 1:
            raise ValidationError("per-class support/query counts must be equal")

    @property
    def n_way(self) -> int:
        return len(self.classes)

    @property
    def k_shot(self) -> int:
        return self.support_x.shape[0] // len(self.classes)

    @property
    def q_query(self) -> int:
        return self.query_x.shape[0] // len(self.classes)

    @property
    def n_v(self) -> int:
        return self.support_x.shape[1]

    @property
    def support(self) -> list[tuple[np.ndarray, int]]:
        """Support set as (feature, class_index) pairs."""
        return [(self.support_x[i], int(self.support_y[i])) for i in range(len(self.support_y))]

    @property
    def query(self) -> list[tuple[np.ndarray, int]]:
        return [(self.query_x[i], int(self.query_y[i])) for i in range(len(self.query_y))]


@dataclass(frozen=True)
class ImportanceMatrix:
    """m x n_v matrix; row j holds the per-coordinate importance of episode j."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValidationError(f"importance matrix must be 2-D, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("importance matrix contains non-finite entries")
        if np.any(vals < 0):
            raise ValidationError("importance matrix contains negative entries")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]


@dataclass(frozen=True)
class FacetPartition:
    """Partition of coordinate indices {0..n_v-1} into F non-empty facets.

    Facets are canonicalized on construction: indices ascending within a
    facet, facets ordered by smallest member.
    """

    n_v: int
    facets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n_v < 1:
            raise ValidationError("n_v must be positive")
        canon = tuple(tuple(sorted(int(i) for i in fac)) for fac in self.facets)
        canon = tuple(sorted(canon, key=lambda fac: fac[0] if fac else -1))
        object.__setattr__(self, "facets", canon)
        if not canon or any(len(fac) == 0 for fac in canon):
            raise ValidationError("every facet must be non-empty")
        flat = [i for fac in canon for i in fac]
        if len(flat) != len(set(flat)):
            raise ValidationError("facets must be pairwise disjoint")
        if any(i < 0 or i >= self.n_v for i in flat):
            raise ValidationError(f"facet index out of range for n_v={self.n_v}")
        if len(flat) != self.n_v:
            missing = sorted(set(range(self.n_v)) - set(flat))
            raise ValidationError(f"facets do not cover all coordinates; missing {missing}")

    @property
    def f(self) -> int:
        return len(self.facets)

    def labels(self) -> np.ndarray:
        """Facet index of every coordinate, shape (n_v,)."""
        lab = np.empty(self.n_v, dtype=np.int64)
        for fi, fac in enumerate(self.facets):
            lab[list(fac)] = fi
        return lab

    def coordinate_weights(self, eta: np.ndarray) -> np.ndarray:
        """Spread per-facet weights onto coordinates: w[j] = eta[facet_of(j)]."""
        eta = np.asarray(eta, dtype=np.float64)
        if eta.shape != (self.f,):
            raise ConfigurationError(f"expected {self.f} facet weights, got shape {eta.shape}")
        return eta[self.labels()]


@dataclass(frozen=True)
class RunConfig:
    """Episode-protocol hyper-parameters shared by the pipeline stages."""

    n_way: int
    k_shot: int
    q_query: int = 15
    episodes: int = 600
    lam: float = 10.0
    f_facets: int = 7
    seed: int = 0
    m_importance: int = 5000

    def __post_init__(self):
        if self.n_way < 2:
            raise ConfigurationError(f"n_way must be >= 2, got {self.n_way}")
        if self.k_shot < 1 or self.q_query < 1:
            raise ConfigurationError("k_shot and q_query must be >= 1")
        if self.episodes < 1 or self.m_importance < 1:
            raise ConfigurationError("episode counts must be >= 1")
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.lam}")
        if self.f_facets < 1:
            raise ConfigurationError(f"f_facets must be >= 1, got {self.f_facets}")


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def _read_lines(path) -> list[str]:
    return Path(path).read_text(encoding="utf-8").splitlines()


def _parse_floats(text: str, path, line_no: int) -> np.ndarray:
    parts = text.split(",")
    out = np.empty(len(parts), dtype=np.float64)
    for i, tok in enumerate(parts):
        try:
            out[i] = float(tok)
        except ValueError:
            raise ParseError(path, line_no, f"non-numeric value {tok!r}") from None
    if not np.all(np.isfinite(out)):
        raise ParseError(path, line_no, "non-finite value")
    return out


def _is_skippable(line: str) -> bool:
    s = line.strip()
    return not s or s.startswith("#")


# ---------------------------------------------------------------------------
# feature bank
# ---------------------------------------------------------------------------

_DIM_HEADER = re.compile(r"^#dim=(\d+)$")


def parse_feature_bank(path) -> FeatureBank:
    """Parse a feature-bank file; raises ParseError with the offending line."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(path, 1, "empty file, expected '#dim=<n_v>' header")
    m = _DIM_HEADER.match(lines[0].strip())
    if not m:
        raise ParseError(path, 1, f"expected '#dim=<n_v>' header, got {lines[0]!r}")
    dim = int(m.group(1))
    records: list[BankRecord] = []
    seen: set[tuple[str, str]] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if _is_skippable(line):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(parts)}")
        class_id, image_id, payload = parts
        vec = _parse_floats(payload, path, line_no)
        if vec.shape[0] != dim:
            raise ParseError(path, line_no, f"expected {dim} features, got {vec.shape[0]}")
        key = (class_id, image_id)
        if key in seen:
            raise DuplicateRecordError(path, line_no, f"duplicate record {key!r}")
        seen.add(key)
        records.append(BankRecord(class_id, image_id, vec))
    try:
        return FeatureBank(dim=dim, records=tuple(records))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def serialize_feature_bank(bank: FeatureBank) -> str:
    out = [f"#dim={bank.dim}"]
    for rec in bank.records:
        out.append(f"{rec.class_id}\t{rec.image_id}\t{_fmt_row(rec.features)}")
    return "\n".join(out) + "\n"


def write_feature_bank(bank: FeatureBank, path) -> None:
    Path(path).write_text(serialize_feature_bank(bank), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# class embeddings
# ---------------------------------------------------------------------------


def parse_class_embeddings(path) -> dict[str, ClassEmbedding]:
    """Parse a class-embedding file into a class_id -> ClassEmbedding map."""
    lines = _read_lines(path)
    embeddings: dict[str, ClassEmbedding] = {}
    d_w: int | None = None
    for line_no, line in enumerate(lines, start=1):
        if _is_skippable(line):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(path, line_no, f"expected 3 tab-separated fields, got {len(parts)}")
        class_id, dw_text, payload = parts
        try:
            row_dw = int(dw_text)
        except ValueError:
            raise ParseError(path, line_no, f"non-integer d_w {dw_text!r}") from None
        vec = _parse_floats(payload, path, line_no)
        if vec.shape[0] != row_dw:
            raise ParseError(path, line_no, f"declared d_w={row_dw} but found {vec.shape[0]} values")
        if d_w is None:
            d_w = row_dw
        elif row_dw != d_w:
            raise ParseError(path, line_no, f"inconsistent d_w: {row_dw} after {d_w}")
        if class_id in embeddings:
            raise DuplicateRecordError(path, line_no, f"duplicate class_id {class_id!r}")
        embeddings[class_id] = ClassEmbedding(class_id, vec)
    return embeddings


def serialize_class_embeddings(embeddings: Mapping[str, ClassEmbedding]) -> str:
    out = []
    for class_id, emb in embeddings.items():
        out.append(f"{class_id}\t{emb.vector.shape[0]}\t{_fmt_row(emb.vector)}")
    return "\n".join(out) + "\n"


def write_class_embeddings(embeddings: Mapping[str, ClassEmbedding], path) -> None:
    Path(path).write_text(serialize_class_embeddings(embeddings), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# importance matrix
# ---------------------------------------------------------------------------

_MATRIX_HEADER = re.compile(r"^#rows=(\d+) cols=(\d+)$")


def parse_importance_matrix(path) -> ImportanceMatrix:
    lines = _read_lines(path)
    if not lines:
        raise ParseError(path, 1, "empty file, expected '#rows=<m> cols=<n_v>' header")
    m = _MATRIX_HEADER.match(lines[0].strip())
    if not m:
        raise ParseError(path, 1, f"expected '#rows=<m> cols=<n_v>' header, got {lines[0]!r}")
    rows, cols = int(m.group(1)), int(m.group(2))
    data = np.empty((rows, cols), dtype=np.float64)
    filled = 0
    for line_no, line in enumerate(lines[1:], start=2):
        if _is_skippable(line):
            continue
        if filled >= rows:
            raise ParseError(path, line_no, f"more than the declared {rows} rows")
        vec = _parse_floats(line, path, line_no)
        if vec.shape[0] != cols:
            raise ParseError(path, line_no, f"expected {cols} columns, got {vec.shape[0]}")
        data[filled] = vec
        filled += 1
    if filled != rows:
        raise ParseError(path, len(lines), f"declared {rows} rows but found {filled}")
    try:
        return ImportanceMatrix(values=data)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def serialize_importance_matrix(matrix: ImportanceMatrix) -> str:
    out = [f"#rows={matrix.rows} cols={matrix.cols}"]
    for row in matrix.values:
        out.append(_fmt_row(row))
    return "\n".join(out) + "\n"


def write_importance_matrix(matrix: ImportanceMatrix, path) -> None:
    Path(path).write_text(serialize_importance_matrix(matrix), encoding="utf-8", newline="\n")


# ---------------------------------------------------------------------------
# facet partition
# ---------------------------------------------------------------------------

_FACET_HEADER = re.compile(r"^#nv=(\d+) f=(\d+)$")


def parse_facet_partition(path) -> FacetPartition:
    lines = _read_lines(path)
    if not lines:
        raise ParseError(path, 1, "empty file, expected '#nv=<n_v> f=<F>' header")
    m = _FACET_HEADER.match(lines[0].strip())
    if not m:
        raise ParseError(path, 1, f"expected '#nv=<n_v> f=<F>' header, got {lines[0]!r}")
    n_v, f = int(m.group(1)), int(m.group(2))
    facets: list[tuple[int, ...]] = []
    seen_ids: set[int] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if _is_skippable(line):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected 'facet_id<TAB>indices', got {line!r}")
        try:
            facet_id = int(parts[0])
            indices = tuple(int(tok) for tok in parts[1].split(","))
        except ValueError:
            raise ParseError(path, line_no, "non-integer facet id or index") from None
        if facet_id < 0 or facet_id >= f:
            raise ParseError(path, line_no, f"facet_id {facet_id} outside 0..{f - 1}")
        if facet_id in seen_ids:
            raise DuplicateRecordError(path, line_no, f"duplicate facet_id {facet_id}")
        seen_ids.add(facet_id)
        facets.append(indices)
    if len(facets) != f:
        raise ValidationError(f"{path}: declared f={f} facets but found {len(facets)}")
    try:
        return FacetPartition(n_v=n_v, facets=tuple(facets))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def serialize_facet_partition(partition: FacetPartition) -> str:
    out = [f"#nv={partition.n_v} f={partition.f}"]
    for fi, fac in enumerate(partition.facets):
        out.append(f"{fi}\t{','.join(str(i) for i in fac)}")
    return "\n".join(out) + "\n"


def write_facet_partition(partition: FacetPartition, path) -> None:
    Path(path).write_text(serialize_facet_partition(partition), encoding="utf-8", newline="\n")

"""Masked-position embedding of class names.

For each sentence, one occurrence of the name is replaced piece by piece
with the model's mask token.  The class vector is the mean of the model's
output at the masked positions (multi-piece names contribute the mean over
their pieces) and then the mean across sentences.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .sentences import SentenceSample

FALLBACK_TEMPLATE = "A photo of a [MASK]."


class EmptySampleError(ValueError):
    """Raised when a sample has no sentences; callers should fall back."""

    def __init__(self, class_id: str, name: str) -> None:
        super().__init__(
            f"class {class_id!r}: no sentences for name {name!r}; "
            f"embed the template {FALLBACK_TEMPLATE!r} instead"
        )
        self.class_id = class_id
        self.name = name


class EmptySynsetError(ValueError):
    """Raised when every name of a class has an empty sample."""

    def __init__(self, class_id: str) -> None:
        super().__init__(
            f"class {class_id!r}: every synset name has an empty sample; "
            f"embed the template {FALLBACK_TEMPLATE!r} instead"
        )
        self.class_id = class_id


def _find_span(tokens: list[str], needle: list[str]) -> int | None:
    n = len(needle)
    for i in range(len(tokens) - n + 1):
        if tokens[i : i + n] == needle:
            return i
    return None


def mask_one_occurrence(sentence: str, name: str, model) -> tuple[list[str], tuple[int, ...]]:
    """Replace every piece of the first occurrence of ``name`` with the mask.

    Returns the masked token list and the masked positions.  Later
    occurrences of the name are left untouched.
    """
    tokens = model.tokenize(sentence)
    needle = model.tokenize(name)
    if not needle:
        raise ValueError(f"name {name!r} has no tokens")
    start = _find_span(tokens, needle)
    if start is None:
        raise ValueError(f"name {name!r} does not occur in {sentence!r}")
    positions = tuple(range(start, start + len(needle)))
    masked = list(tokens)
    for pos in positions:
        masked[pos] = model.mask_token
    return masked, positions


def _truncate_centered(
    tokens: list[str], positions: tuple[int, ...], limit: int
) -> tuple[list[str], tuple[int, ...]]:
    # window centered on the masked occurrence; the occurrence always fits
    if len(tokens) <= limit:
        return tokens, positions
    if len(positions) > limit:
        raise ValueError("masked occurrence longer than the model input limit")
    center = (positions[0] + positions[-1] + 1) // 2
    start = center - limit // 2
    start = max(0, min(start, len(tokens) - limit))
    start = min(start, positions[0])
    start = max(start, positions[-1] - limit + 1)
    kept = tokens[start : start + limit]
    return kept, tuple(p - start for p in positions)


def _sentence_vector(sentence: str, name: str, model) -> np.ndarray:
    tokens, positions = mask_one_occurrence(sentence, name, model)
    tokens, positions = _truncate_centered(tokens, positions, model.max_tokens)
    vecs = model.vectors(tokens)
    return vecs[list(positions)].mean(axis=0)


def embed_class(sample: SentenceSample, model) -> np.ndarray:
    """Mean masked-position vector over the sample's sentences."""
    if not sample.sentences:
        raise EmptySampleError(sample.class_id, sample.name)
    rows = [_sentence_vector(s, sample.name, model) for s in sample.sentences]
    return np.mean(rows, axis=0)


def template_embedding(model) -> np.ndarray:
    """Masked-position vector of the fallback template sentence."""
    tokens = model.tokenize(FALLBACK_TEMPLATE)
    positions = [i for i, tok in enumerate(tokens) if tok == model.mask_token]
    return model.vectors(tokens)[positions].mean(axis=0)


def embed_synset(
    names: Sequence[str], samples: Mapping[str, SentenceSample], model
) -> np.ndarray:
    """Mean over per-name embeddings; names with empty samples are skipped."""
    if not names:
        raise ValueError("empty name list")
    class_id = None
    parts = []
    for name in names:
        sample = samples[name]
        class_id = sample.class_id
        if not sample.sentences:
            continue
        parts.append(embed_class(sample, model))
    if not parts:
        raise EmptySynsetError(class_id if class_id is not None else names[0])
    return np.mean(parts, axis=0)

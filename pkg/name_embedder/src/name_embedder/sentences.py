"""Corpus sentence collection for class names.

Matching runs on the same tokenization the models use: a sentence matches a
name when the name's token sequence appears contiguously in the sentence's
tokens.  That makes matching whole-word and case-insensitive, and it
guarantees every collected sentence is actually maskable later.  Plain
regex word boundaries cannot promise that for hyphenated or punctuated
text.

The corpus is read once and held in memory; fine at desk scale.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .model import tokenize


def _contains_tokens(haystack: list[str], needle: list[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    return any(haystack[i : i + n] == needle for i in range(len(haystack) - n + 1))


@dataclass(frozen=True)
class SentenceSample:
    """Up to m_s corpus sentences, each containing ``name`` at least once.

    An empty ``sentences`` tuple is a legitimate state: it records that the
    corpus had nothing for this name.
    """

    class_id: str
    name: str
    sentences: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sentences", tuple(self.sentences))
        needle = tokenize(self.name)
        if not needle:
            raise ValueError(f"class {self.class_id!r}: name {self.name!r} has no tokens")
        for sentence in self.sentences:
            if not _contains_tokens(tokenize(sentence), needle):
                raise ValueError(
                    f"class {self.class_id!r}: sentence lacks an occurrence of "
                    f"{self.name!r}: {sentence!r}"
                )


def collect_sentences(
    corpus_path: str | Path,
    names_by_class: Mapping[str, Sequence[str]],
    m_s: int,
    seed: int = 0,
) -> dict[str, dict[str, SentenceSample]]:
    """Sample up to ``m_s`` matching corpus sentences per (class, name).

    Sampling is uniform without replacement and seeded per name, so a rerun
    over the same corpus reproduces the same subsets regardless of how many
    classes are requested.  Kept sentences stay in corpus order.  A name
    with zero matches produces a warning and an empty sample.
    """
    if m_s <= 0:
        raise ValueError(f"m_s must be positive, got {m_s}")
    lines = Path(corpus_path).read_text(encoding="utf-8").splitlines()
    sentences = [ln.strip() for ln in lines if ln.strip()]
    token_rows = [tokenize(s) for s in sentences]

    out: dict[str, dict[str, SentenceSample]] = {}
    for class_id, names in names_by_class.items():
        per_name: dict[str, SentenceSample] = {}
        for name in names:
            needle = tokenize(name)
            hits = [s for s, row in zip(sentences, token_rows) if _contains_tokens(row, needle)]
            if not hits:
                warnings.warn(f"class {class_id!r}: no corpus sentences match name {name!r}")
            if len(hits) > m_s:
                rng = random.Random(f"{seed}:{class_id}:{name}")
                picked = sorted(rng.sample(range(len(hits)), m_s))
                hits = [hits[i] for i in picked]
            per_name[name] = SentenceSample(class_id=class_id, name=name, sentences=tuple(hits))
        out[class_id] = per_name
    return out

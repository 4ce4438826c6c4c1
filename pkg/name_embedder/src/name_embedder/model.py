"""Model handles that turn token sequences into per-position output vectors.

The default handle is an offline, fully deterministic stand-in for a
pretrained masked language model.  Every token owns a fixed unit vector
derived from its SHA-256 digest, and the output at position i is a
decay-weighted sum over the *other* positions' token vectors.  The vector
read off at a masked slot therefore depends only on the surrounding
context, never on the token that was masked away, which is the property
the downstream averaging relies on.

Identifiers are namespaced (``hash:<width>``) so a handle backed by real
pretrained weights can be added without touching callers.
"""

from __future__ import annotations

import hashlib
import re
import struct
from typing import Sequence

import numpy as np

MASK_TOKEN = "[MASK]"

# the mask token must survive as one piece, so it is matched before the
# generic word/punctuation alternatives
_TOKEN_RE = re.compile(r"\[MASK\]|\w+|[^\w\s]")

_CONTEXT_DECAY = 0.7


def tokenize(text: str) -> list[str]:
    """Lowercase word / punctuation split; the mask token stays verbatim."""
    out: list[str] = []
    for piece in _TOKEN_RE.findall(text):
        out.append(piece if piece == MASK_TOKEN else piece.lower())
    return out


class HashModel:
    """Deterministic context-hash model.

    ``vectors(tokens)[i]`` is ``sum_{j != i} decay**|i-j| * e(token_j)``
    where ``e`` maps a token to a fixed unit vector expanded from SHA-256
    digests.  No randomness, no state beyond a per-token cache, identical
    output across processes and platforms.
    """

    mask_token = MASK_TOKEN

    def __init__(self, width: int) -> None:
        if width <= 0:
            raise ValueError(f"model width must be positive, got {width}")
        self.width = int(width)
        self.max_tokens = 128
        self._token_vecs: dict[str, np.ndarray] = {}

    def tokenize(self, text: str) -> list[str]:
        return tokenize(text)

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_vecs.get(token)
        if vec is not None:
            return vec
        raw = token.encode("utf-8")
        words: list[int] = []
        counter = 0
        while len(words) < self.width:
            digest = hashlib.sha256(raw + b"\x00" + str(counter).encode("ascii")).digest()
            words.extend(struct.unpack(">8I", digest))
            counter += 1
        arr = np.asarray(words[: self.width], dtype=np.float64)
        arr = arr / 2147483648.0 - 1.0
        arr /= np.linalg.norm(arr) or 1.0
        arr.setflags(write=False)
        self._token_vecs[token] = arr
        return arr

    def vectors(self, tokens: Sequence[str]) -> np.ndarray:
        """Per-position output vectors, shape (len(tokens), width)."""
        if not tokens:
            raise ValueError("empty token sequence")
        if len(tokens) > self.max_tokens:
            raise ValueError(
                f"{len(tokens)} tokens exceed the model limit of {self.max_tokens}; truncate first"
            )
        embedded = np.stack([self._token_vector(tok) for tok in tokens])
        idx = np.arange(len(tokens))
        weights = _CONTEXT_DECAY ** np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
        np.fill_diagonal(weights, 0.0)  # output at i must not see token i
        return weights @ embedded


def load_model(spec: str) -> HashModel:
    """Resolve a model identifier such as ``hash:1024``."""
    kind, sep, arg = spec.partition(":")
    if kind == "hash" and sep:
        try:
            width = int(arg)
        except ValueError:
            raise ValueError(f"bad width in model identifier {spec!r}") from None
        return HashModel(width)
    raise ValueError(f"unknown model identifier {spec!r}; expected 'hash:<width>'")

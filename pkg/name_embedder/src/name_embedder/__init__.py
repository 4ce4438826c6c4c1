"""Offline extraction of class-name embeddings.

Mask the class name in sampled corpus sentences, read the model's output
vectors at the masked positions, average over positions and sentences, and
write one embedding row per class.
"""

from .embed import (
    FALLBACK_TEMPLATE,
    EmptySampleError,
    EmptySynsetError,
    embed_class,
    embed_synset,
    mask_one_occurrence,
    template_embedding,
)
from .model import HashModel, load_model, tokenize
from .sentences import SentenceSample, collect_sentences
from .writer import write_embeddings

__all__ = [
    "FALLBACK_TEMPLATE",
    "EmptySampleError",
    "EmptySynsetError",
    "HashModel",
    "SentenceSample",
    "collect_sentences",
    "embed_class",
    "embed_synset",
    "load_model",
    "mask_one_occurrence",
    "template_embedding",
    "tokenize",
    "write_embeddings",
]

"""Facet-aware metric-based few-shot classification engine.

Pipeline: per-episode coordinate importance -> Kendall-tau column
similarity -> average-link facets -> class-name-embedding gate ->
lambda-blended prototype distances for episodic evaluation.
"""

from .kernels import BACKEND_NAME

__version__ = "0.1.0"

__all__ = ["BACKEND_NAME", "__version__"]

"""Kernel backend selection.

The compiled Cython extension is used when it imported successfully; the
pure-numpy fallback otherwise. Set ``FACETPROTO_PURE=1`` to force the
fallback (the benchmark and the golden-file test rely on this).

Both backends expose: ``kendall_tau``, ``tau_prepare``/``tau_block``,
``importance_row``, ``blended_scores``, ``BACKEND_NAME``.
"""

from __future__ import annotations

import os

from . import pure

if os.environ.get("FACETPROTO_PURE", "0").strip() not in ("", "0"):
    backend = pure
else:
    try:
        from . import native as backend  # type: ignore[no-redef]
    except ImportError:
        backend = pure

BACKEND_NAME = backend.BACKEND_NAME

kendall_tau = backend.kendall_tau
tau_prepare = backend.tau_prepare
tau_block = backend.tau_block
importance_row = backend.importance_row
blended_scores = backend.blended_scores


def available_backends():
    """All importable backends, for tests and the benchmark."""
    backends = {"pure": pure}
    try:
        from . import native

        backends["native"] = native
    except ImportError:
        pass
    return backends

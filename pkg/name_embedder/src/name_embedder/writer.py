"""Class-embedding file output.

One row per class: ``class_id<TAB>width<TAB>comma-joined floats``.  Rows
are sorted by class_id so reruns produce identical bytes.  Classes flagged
as fallbacks get a leading comment line; readers of the format skip
comments.
"""

from __future__ import annotations

from pathlib import Path
from typing import Collection, Mapping

import numpy as np


def write_embeddings(
    vectors: Mapping[str, np.ndarray],
    path: str | Path,
    fallback: Collection[str] = (),
) -> None:
    if not vectors:
        raise ValueError("no embeddings to write")
    unknown = set(fallback) - set(vectors)
    if unknown:
        raise ValueError(f"fallback flags for unknown classes: {sorted(unknown)}")

    widths = set()
    lines: list[str] = []
    for class_id in sorted(vectors):
        if not class_id or "\t" in class_id or "\n" in class_id or class_id.startswith("#"):
            raise ValueError(f"class id {class_id!r} cannot be written to the file format")
        vec = np.asarray(vectors[class_id], dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValueError(f"class {class_id!r}: embedding must be a non-empty vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"class {class_id!r}: embedding has non-finite entries")
        widths.add(vec.shape[0])
        if class_id in fallback:
            lines.append(f"# fallback: {class_id}")
        payload = ",".join(repr(float(v)) for v in vec)
        lines.append(f"{class_id}\t{vec.shape[0]}\t{payload}")
    if len(widths) != 1:
        raise ValueError(f"mixed embedding widths {sorted(widths)}; one model per file")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

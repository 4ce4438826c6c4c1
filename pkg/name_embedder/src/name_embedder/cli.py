"""Command line entry point.

    name-embedder --corpus corpus.txt --classes classes.tsv \\
        --model hash:1024 --m-s 1000 --seed 7 --out embeddings.txt

The class list holds one class per line: ``class_id<TAB>name1|name2|...``.
Classes whose names all have zero corpus matches are embedded through the
fallback template and flagged with a comment line in the output.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .embed import EmptySynsetError, embed_synset, template_embedding
from .model import load_model
from .sentences import collect_sentences
from .writer import write_embeddings


def parse_class_list(path: str | Path) -> dict[str, tuple[str, ...]]:
    out: dict[str, tuple[str, ...]] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(
                f"{path}:{line_no}: expected class_id<TAB>names, got {len(parts)} fields"
            )
        class_id = parts[0].strip()
        names = tuple(n.strip() for n in parts[1].split("|") if n.strip())
        if not class_id or not names:
            raise ValueError(f"{path}:{line_no}: empty class id or name list")
        if class_id in out:
            raise ValueError(f"{path}:{line_no}: duplicate class id {class_id!r}")
        out[class_id] = names
    if not out:
        raise ValueError(f"{path}: no classes listed")
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="name-embedder",
        description="Embed class names by masking them in corpus sentences.",
    )
    parser.add_argument("--corpus", required=True, help="line-delimited plain text corpus")
    parser.add_argument("--classes", required=True, help="class list: class_id<TAB>name1|name2|...")
    parser.add_argument("--model", default="hash:1024", help="model identifier (default hash:1024)")
    parser.add_argument("--m-s", dest="m_s", type=int, default=1000, help="max sentences per name")
    parser.add_argument("--seed", type=int, default=0, help="sampling seed")
    parser.add_argument("--out", required=True, help="output embedding file")
    args = parser.parse_args(argv)

    try:
        model = load_model(args.model)
        classes = parse_class_list(args.classes)
        samples = collect_sentences(args.corpus, classes, args.m_s, seed=args.seed)
        embeddings = {}
        fallback: set[str] = set()
        for class_id, names in classes.items():
            try:
                embeddings[class_id] = embed_synset(names, samples[class_id], model)
            except EmptySynsetError:
                embeddings[class_id] = template_embedding(model)
                fallback.add(class_id)
        write_embeddings(embeddings, args.out, fallback=fallback)
    except (OSError, ValueError) as exc:
        print(f"name-embedder: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

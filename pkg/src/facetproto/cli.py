"""Command-line front end. The pipeline is staged through files so every
stage (importance matrix, facet discovery, gate training, evaluation) is
independently runnable, cacheable, and replayable.

Exit codes: 0 success, 2 bad flags or configuration, 3 unreadable or
invalid input files, 4 a bank too small for the requested episode shape.
"""

from __future__ import annotations

import argparse
import sys
import time

from .data_model import (
    ClassEmbedding,
    FacetPartition,
    RunConfig,
    parse_class_embeddings,
    parse_facet_partition,
    parse_feature_bank,
    parse_importance_matrix,
    write_class_embeddings,
    write_facet_partition,
    write_feature_bank,
    write_importance_matrix,
)
from .errors import (
    CapacityError,
    ConfigurationError,
    FacetProtoError,
    ParseError,
    ValidationError,
)
from .eval_harness import evaluate, format_report, generate_synthetic, write_results
from .facets import agglomerate, build_similarity
from .importance import build_importance_matrix
from .parallel import resolve_threads
from .weight_net import (
    GateConfig,
    GateParams,
    init_gate,
    parse_gate_params,
    train_gate,
    write_gate_params,
)

__all__ = ["main"]


def _add_threads(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker threads (default: FSL_THREADS or the CPU count)",
    )


def _add_episode_shape(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="classes per episode")
    p.add_argument("--k", type=int, required=True, help="support examples per class")
    p.add_argument("--q", type=int, default=15, help="query examples per class")
    p.add_argument("--seed", type=int, required=True, help="64-bit episode stream seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="facetproto",
        description="Facet-aware prototype classification pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("importance", help="episode importance matrix from a feature bank")
    p.add_argument("--features", required=True, help="feature bank file")
    _add_episode_shape(p)
    p.add_argument("--m", type=int, required=True, help="number of episodes (matrix rows)")
    p.add_argument("--out", required=True, help="output importance matrix file")
    _add_threads(p)

    p = sub.add_parser("facets", help="cluster matrix columns into facets")
    p.add_argument("--matrix", required=True, help="importance matrix file")
    p.add_argument("--f", type=int, required=True, help="number of facets")
    p.add_argument("--out", required=True, help="output facet partition file")
    _add_threads(p)

    p = sub.add_parser("train-gate", help="train the facet-weight gate")
    p.add_argument("--features", required=True, help="feature bank file")
    p.add_argument("--embeddings", required=True, help="class embedding file")
    p.add_argument("--partition", required=True, help="facet partition file")
    _add_episode_shape(p)
    p.add_argument("--episodes", type=int, default=10000, help="training episodes")
    p.add_argument("--lam", type=float, default=10.0, help="blend weight lambda")
    p.add_argument("--lr", type=float, default=0.01, help="learning rate")
    p.add_argument("--init-scale", type=float, default=0.01, help="uniform init half-width")
    p.add_argument("--out", required=True, help="output gate parameter file")

    p = sub.add_parser("eval", help="episodic accuracy with 95%% confidence interval")
    p.add_argument("--features", required=True, help="feature bank file")
    p.add_argument("--embeddings", help="class embedding file (omit for a uniform gate)")
    p.add_argument("--partition", required=True, help="facet partition file")
    p.add_argument("--gate", help="gate parameter file (omit for a uniform gate)")
    _add_episode_shape(p)
    p.add_argument("--episodes", type=int, default=600, help="evaluation episodes")
    p.add_argument("--lam", type=float, default=10.0, help="blend weight lambda")
    p.add_argument(
        "--per-class-weights",
        action="store_true",
        help="weight each prototype with its own class's facet weights",
    )
    p.add_argument("--results", help="write per-episode accuracies (TSV) here")
    p.add_argument("--report", help="write the text report here as well")
    _add_threads(p)

    p = sub.add_parser("synth", help="planted-facet synthetic bank and embeddings")
    p.add_argument("--classes", type=int, required=True, help="number of classes")
    p.add_argument("--per-class", type=int, required=True, help="examples per class")
    p.add_argument("--nv", type=int, required=True, help="feature dimension")
    p.add_argument(
        "--facets",
        required=True,
        help="planted partition, e.g. '0-7;8-15;16-23;24-31'",
    )
    p.add_argument(
        "--assign",
        required=True,
        help="comma list of per-class facet indices, each 'f' or 'f:patternkey'",
    )
    p.add_argument("--sigma", type=float, required=True, help="facet nuisance noise scale")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--delta", type=float, default=1.0, help="class signal norm")
    p.add_argument("--jitter", type=float, default=0.05, help="per-coordinate jitter fraction")
    p.add_argument("--embedding-noise", type=float, default=0.05)
    p.add_argument("--prefix", default="class", help="class id prefix")
    p.add_argument("--out-features", required=True)
    p.add_argument("--out-embeddings", required=True)
    p.add_argument("--out-partition", help="also write the planted partition here")

    return parser


def _parse_planted_facets(text: str, n_v: int) -> FacetPartition:
    facets = []
    for part in text.split(";"):
        indices: list[int] = []
        for piece in part.split(","):
            piece = piece.strip()
            if not piece:
                raise ConfigurationError(f"empty facet entry in {text!r}")
            if "-" in piece:
                lo, _, hi = piece.partition("-")
                indices.extend(range(int(lo), int(hi) + 1))
            else:
                indices.append(int(piece))
        facets.append(tuple(indices))
    return FacetPartition(n_v=n_v, facets=tuple(facets))


def _parse_assignments(text: str) -> list[int | tuple[int, int]]:
    out: list[int | tuple[int, int]] = []
    for piece in text.split(","):
        piece = piece.strip()
        if ":" in piece:
            facet, _, key = piece.partition(":")
            out.append((int(facet), int(key)))
        else:
            out.append(int(piece))
    return out


def cmd_importance(args) -> int:
    bank = parse_feature_bank(args.features)
    config = RunConfig(
        n_way=args.n,
        k_shot=args.k,
        q_query=args.q,
        seed=args.seed,
        m_importance=args.m,
    )
    start = time.perf_counter()
    matrix = build_importance_matrix(bank, config, threads=resolve_threads(args.threads))
    elapsed = time.perf_counter() - start
    write_importance_matrix(matrix, args.out)
    print(f"episodes: {matrix.rows}")
    print(f"coordinates: {matrix.cols}")
    print(f"wall_time_s: {elapsed:.3f}")
    return 0


def cmd_facets(args) -> int:
    matrix = parse_importance_matrix(args.matrix)
    sim = build_similarity(matrix, threads=resolve_threads(args.threads))
    partition = agglomerate(sim, args.f)
    write_facet_partition(partition, args.out)
    print(f"facets: {partition.f}")
    print(f"coordinates: {partition.n_v}")
    return 0


def cmd_train_gate(args) -> int:
    bank = parse_feature_bank(args.features)
    embeddings = parse_class_embeddings(args.embeddings)
    partition = parse_facet_partition(args.partition)
    config = RunConfig(
        n_way=args.n,
        k_shot=args.k,
        q_query=args.q,
        lam=args.lam,
        f_facets=partition.f,
        seed=args.seed,
    )
    gate_config = GateConfig(
        learning_rate=args.lr,
        train_episodes=args.episodes,
        init_scale=args.init_scale,
    )
    params = train_gate(bank, embeddings, partition, config, gate_config)
    write_gate_params(params, args.out)
    print(f"facets: {params.f}")
    print(f"embedding_width: {params.d_w}")
    print(f"episodes: {gate_config.train_episodes}")
    return 0


def cmd_eval(args) -> int:
    bank = parse_feature_bank(args.features)
    partition = parse_facet_partition(args.partition)
    config = RunConfig(
        n_way=args.n,
        k_shot=args.k,
        q_query=args.q,
        episodes=args.episodes,
        lam=args.lam,
        f_facets=partition.f,
        seed=args.seed,
    )
    if args.gate:
        gate = parse_gate_params(args.gate)
        if args.embeddings is None:
            raise ConfigurationError("--gate requires --embeddings")
        embeddings = parse_class_embeddings(args.embeddings)
    else:
        # zero parameters give uniform facet weights for every class, so no
        # per-class embedding is needed; with lam=0 this is plain ProtoNet
        gate = init_gate(partition.f, 1, seed=0, init_scale=0.0)
        embeddings = {
            class_id: ClassEmbedding(class_id=class_id, vector=[0.0])
            for class_id in bank.class_ids()
        }
    report = evaluate(
        bank,
        embeddings,
        partition,
        gate,
        config,
        threads=resolve_threads(args.threads),
        per_class_weights=args.per_class_weights,
    )
    text = format_report(report)
    sys.stdout.write(text)
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    if args.results:
        write_results(report, args.results)
    return 0


def cmd_synth(args) -> int:
    planted = _parse_planted_facets(args.facets, args.nv)
    assignments = _parse_assignments(args.assign)
    bank, embeddings = generate_synthetic(
        n_classes=args.classes,
        per_class=args.per_class,
        n_v=args.nv,
        planted_partition=planted,
        class_facet_signal=assignments,
        noise_sigma=args.sigma,
        seed=args.seed,
        class_prefix=args.prefix,
        embedding_noise=args.embedding_noise,
        signal_delta=args.delta,
        coordinate_jitter=args.jitter,
    )
    write_feature_bank(bank, args.out_features)
    write_class_embeddings(embeddings, args.out_embeddings)
    if args.out_partition:
        write_facet_partition(planted, args.out_partition)
    print(f"classes: {len(bank.class_ids())}")
    print(f"records: {len(bank.records)}")
    print(f"coordinates: {bank.dim}")
    return 0


_COMMANDS = {
    "importance": cmd_importance,
    "facets": cmd_facets,
    "train-gate": cmd_train_gate,
    "eval": cmd_eval,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FacetProtoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

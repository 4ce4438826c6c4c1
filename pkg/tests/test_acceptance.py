"""Acceptance gate: every top-level behavioral guarantee, one test each.

Each test prints a single PASS line on success (visible with ``pytest -s``)
and fails loudly otherwise. Tolerances are part of the contract and are not
to be loosened here.
"""

import itertools
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from facetproto.data_model import FacetPartition, RunConfig
from facetproto.episodes import episode_stream
from facetproto.eval_harness import (
    compare_runs,
    episode_predictions,
    evaluate,
    evaluate_protonet,
    generate_synthetic,
)
from facetproto.facets import SimilarityMatrix, agglomerate, agglomerate_trace, kendall_tau
from facetproto.importance import build_importance_matrix
from facetproto.proto_metric import blended_dist, fdist, prototype_matrix, sq_euclidean
from facetproto.rng import Xoshiro256StarStar, mix
from facetproto.weight_net import GateConfig, episode_loss_and_grads, init_gate, train_gate

from conftest import make_bank, make_embeddings, make_episode


def _line(text):
    print(f"\n[ACCEPT] {text}")


# ---------------------------------------------------------------------------
# 1. ProtoNet recovery at lambda = 0
# ---------------------------------------------------------------------------


def test_protonet_recovery_at_zero_lambda():
    started = time.perf_counter()
    rng = Xoshiro256StarStar(101)
    checked = 0
    for i in range(100):
        n = 2 + rng.below(5)
        k = 1 + rng.below(4)
        n_v = 3 + rng.below(10)
        ep = make_episode(n=n, k=k, q=3, n_v=n_v, seed=mix(7, i))
        weights = np.array([rng.uniform() for _ in range(n_v)])
        got = episode_predictions(ep, coord_weights=weights, lam=0.0)

        protos = prototype_matrix(ep)
        for t in range(ep.query_x.shape[0]):
            dists = [sq_euclidean(ep.query_x[t], protos[c]) for c in range(n)]
            best = min(range(n), key=lambda c: (dists[c], c))
            assert got[t] == best
            checked += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    _line(
        f"protonet recovery: PASS (100 episodes, {checked} queries, "
        f"{elapsed:.2f}s)"
    )


# ---------------------------------------------------------------------------
# 2. Partition-sum identity
# ---------------------------------------------------------------------------


def _random_partition(rng, n_v):
    order = list(range(n_v))
    rng.shuffle(order)
    f = 1 + rng.below(n_v)
    cut_pool = list(range(1, n_v))
    rng.shuffle(cut_pool)
    cuts = sorted(cut_pool[: f - 1])
    facets = []
    prev = 0
    for cut in cuts + [n_v]:
        facets.append(tuple(sorted(order[prev:cut])))
        prev = cut
    return FacetPartition(n_v=n_v, facets=tuple(facets))


def test_partition_sum_identity():
    rng = Xoshiro256StarStar(202)
    for _ in range(1000):
        n_v = 2 + rng.below(15)
        part = _random_partition(rng, n_v)
        q = np.array([rng.normal() * 3 for _ in range(n_v)])
        v = np.array([rng.normal() * 3 for _ in range(n_v)])
        eu = sq_euclidean(q, v)
        total = sum(
            sq_euclidean(q[list(fac)], v[list(fac)]) for fac in part.facets
        )
        assert total == pytest.approx(eu, rel=1e-9, abs=1e-12)
        uniform = np.full(part.f, 1.0 / part.f)
        assert fdist(q, v, part, uniform) == pytest.approx(
            eu / part.f, rel=1e-9, abs=1e-12
        )
    _line("partition-sum identity: PASS (1000 triples, rel 1e-9)")


# ---------------------------------------------------------------------------
# 3. Kendall-tau oracle equivalence
# ---------------------------------------------------------------------------


def _brute_tau_b(x, y):
    m = len(x)
    conc = disc = tx = ty = 0
    for i, j in itertools.combinations(range(m), 2):
        dx = np.sign(x[j] - x[i])
        dy = np.sign(y[j] - y[i])
        if dx == 0 and dy == 0:
            continue
        if dx == 0:
            tx += 1
        elif dy == 0:
            ty += 1
        elif dx == dy:
            conc += 1
        else:
            disc += 1
    denom = np.sqrt(float(conc + disc + tx)) * np.sqrt(float(conc + disc + ty))
    if denom == 0:
        return 0.0
    return (conc - disc) / denom


def test_kendall_tau_oracle_equivalence():
    rng = Xoshiro256StarStar(303)
    worst = 0.0
    for _ in range(200):
        m = 2 + rng.below(49)
        if rng.below(2):
            x = np.array([float(rng.below(7)) for _ in range(m)])
            y = np.array([float(rng.below(7)) for _ in range(m)])
        else:
            x = np.array([rng.normal() for _ in range(m)])
            y = np.array([rng.normal() for _ in range(m)])
        diff = abs(kendall_tau(x, y) - _brute_tau_b(x, y))
        worst = max(worst, diff)
        assert diff <= 1e-12
    _line(f"kendall-tau oracle: PASS (200 pairs, worst |diff| {worst:.2e})")


# ---------------------------------------------------------------------------
# 4. Clustering oracle equivalence
# ---------------------------------------------------------------------------


def _naive_average_link(sim_vals, f):
    n = sim_vals.shape[0]
    d = 1.0 - sim_vals
    clusters = [[i] for i in range(n)]
    trace = []
    while len(clusters) > f:
        best = best_pair = best_key = None
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                avg = float(
                    np.mean([d[i, j] for i in clusters[a] for j in clusters[b]])
                )
                key = (clusters[a][0], clusters[b][0])
                if best is None or avg < best or (avg == best and key < best_key):
                    best, best_pair, best_key = avg, (a, b), key
        a, b = best_pair
        trace.append((clusters[a][0], clusters[b][0]))
        clusters[a] = sorted(clusters[a] + clusters[b])
        del clusters[b]
        clusters.sort(key=lambda c: c[0])
    return tuple(tuple(c) for c in clusters), trace


def test_clustering_oracle_equivalence():
    from sklearn.metrics import adjusted_rand_score

    rng = Xoshiro256StarStar(404)
    for trial in range(100):
        n = 3 + rng.below(6)  # 3..8
        vals = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                e = (rng.below(17) - 8) / 8.0
                vals[i, j] = vals[j, i] = e
        f = 1 + rng.below(n)
        part, trace = agglomerate_trace(SimilarityMatrix(values=vals), f)
        facets, ref_trace = _naive_average_link(vals, f)
        assert part.facets == facets, f"trial {trial}"
        assert trace == ref_trace, f"trial {trial}"

    blocks = [(0, 2, 4, 6), (1, 3, 5, 7)]
    vals = np.eye(8)
    for i in range(8):
        for j in range(8):
            if i != j:
                same = any(i in b and j in b for b in blocks)
                vals[i, j] = 1.0 if same else -1.0
    part = agglomerate(SimilarityMatrix(values=vals), 2)
    truth = [i % 2 for i in range(8)]
    ari = adjusted_rand_score(truth, part.labels())
    assert ari == 1.0
    _line("clustering oracle: PASS (100 matrices + planted blocks, ARI 1.0)")


# ---------------------------------------------------------------------------
# 5. Gradient check
# ---------------------------------------------------------------------------


def test_gate_gradient_check():
    h = 1e-5
    worst = 0.0
    for trial in range(20):
        rng = Xoshiro256StarStar(mix(505, trial))
        f = 2 + rng.below(3)  # 2..4
        d_w = 2 + rng.below(7)  # 2..8
        per = 1 + rng.below(3)
        n_v = f * per  # <= 12
        part = FacetPartition(
            n_v=n_v,
            facets=tuple(tuple(range(i * per, (i + 1) * per)) for i in range(f)),
        )
        ep = make_episode(
            n=2 + rng.below(2), k=1 + rng.below(2), q=2, n_v=n_v, seed=trial
        )
        embs = make_embeddings(ep.classes, d_w=d_w, seed=trial + 60)
        params = init_gate(f, d_w, seed=trial, init_scale=0.4)
        lam = 0.5 + rng.uniform() * 8.0

        _, dw, db = episode_loss_and_grads(params, ep, embs, part, lam)

        def loss_at(w, b):
            from facetproto.weight_net import GateParams

            return episode_loss_and_grads(
                GateParams(weight=w, bias=b), ep, embs, part, lam
            )[0]

        for idx in np.ndindex(*params.weight.shape):
            wp, wm = params.weight.copy(), params.weight.copy()
            wp[idx] += h
            wm[idx] -= h
            fd = (loss_at(wp, params.bias) - loss_at(wm, params.bias)) / (2 * h)
            rel = abs(dw[idx] - fd) / max(abs(fd), 1e-6)
            worst = max(worst, rel)
            assert rel < 1e-4, (trial, "W", idx, dw[idx], fd)
        for i in range(f):
            bp, bm = params.bias.copy(), params.bias.copy()
            bp[i] += h
            bm[i] -= h
            fd = (loss_at(params.weight, bp) - loss_at(params.weight, bm)) / (2 * h)
            rel = abs(db[i] - fd) / max(abs(fd), 1e-6)
            worst = max(worst, rel)
            assert rel < 1e-4, (trial, "b", i, db[i], fd)
    _line(f"gradient check: PASS (20 episodes, worst rel err {worst:.2e})")


# ---------------------------------------------------------------------------
# 6. Synthetic end to end
# ---------------------------------------------------------------------------

_PLANTED = FacetPartition(
    n_v=32, facets=tuple(tuple(range(8 * i, 8 * (i + 1))) for i in range(4))
)


def test_synthetic_end_to_end():
    started = time.perf_counter()

    base_bank, base_embs = generate_synthetic(
        n_classes=10,
        per_class=25,
        n_v=32,
        planted_partition=_PLANTED,
        class_facet_signal=[i % 4 for i in range(10)],
        noise_sigma=0.5,
        seed=11,
    )
    novel_bank, novel_embs = generate_synthetic(
        n_classes=10,
        per_class=25,
        n_v=32,
        planted_partition=_PLANTED,
        class_facet_signal=[(i % 4, 100 + i) for i in range(10)],
        noise_sigma=0.5,
        seed=22,
        class_prefix="novel",
    )

    pipe_config = RunConfig(
        n_way=5, k_shot=1, q_query=5, seed=33, lam=10.0, f_facets=4,
        m_importance=500,
    )
    matrix = build_importance_matrix(base_bank, pipe_config, threads=2)
    from facetproto.facets import build_similarity

    part = agglomerate(build_similarity(matrix, threads=2), pipe_config.f_facets)
    assert part.facets == _PLANTED.facets, "planted partition not recovered"

    gate = train_gate(
        base_bank, base_embs, part, pipe_config,
        GateConfig(train_episodes=2000),
    )

    eval_config = RunConfig(
        n_way=5, k_shot=1, q_query=5, seed=44, episodes=600, lam=10.0,
        f_facets=4,
    )
    blended = evaluate(novel_bank, novel_embs, part, gate, eval_config)
    baseline = evaluate_protonet(novel_bank, eval_config)
    paired = compare_runs(blended, baseline)
    assert paired.mean_difference > 0.0
    assert paired.mean_difference - paired.ci95 > 0.0, (
        paired.mean_difference,
        paired.ci95,
    )

    elapsed = time.perf_counter() - started
    assert elapsed < 300.0
    _line(
        "synthetic end-to-end: PASS (partition exact, paired gain "
        f"{100 * paired.mean_difference:+.2f}% beyond CI "
        f"{100 * paired.ci95:.2f}%, {elapsed:.1f}s)"
    )


# ---------------------------------------------------------------------------
# 7. CLI determinism
# ---------------------------------------------------------------------------


def _cli(*args):
    env = dict(os.environ)
    env.pop("FSL_THREADS", None)
    res = subprocess.run(
        [sys.executable, "-m", "facetproto.cli", *map(str, args)],
        capture_output=True,
        text=True,
        env=env,
    )
    assert res.returncode == 0, res.stderr
    return res


def test_cli_commands_are_byte_deterministic(tmp_path):
    outs = {}
    for rep in ("x", "y"):
        d = tmp_path / rep
        d.mkdir()
        _cli(
            "synth", "--classes", 6, "--per-class", 8, "--nv", 8,
            "--facets", "0-3;4-7", "--assign", "0,1,0,1,0,1",
            "--sigma", 0.5, "--seed", 11,
            "--out-features", d / "feats.txt",
            "--out-embeddings", d / "embs.txt",
            "--out-partition", d / "planted.txt",
        )
        _cli(
            "importance", "--features", d / "feats.txt",
            "--n", 3, "--k", 1, "--q", 2, "--seed", 5, "--m", 10,
            "--out", d / "A.txt", "--threads", 1 if rep == "x" else 3,
        )
        _cli("facets", "--matrix", d / "A.txt", "--f", 2, "--out", d / "part.txt")
        _cli(
            "train-gate", "--features", d / "feats.txt",
            "--embeddings", d / "embs.txt", "--partition", d / "part.txt",
            "--n", 3, "--k", 1, "--q", 2, "--seed", 5,
            "--episodes", 50, "--lam", 10, "--out", d / "gate.txt",
        )
        _cli(
            "eval", "--features", d / "feats.txt",
            "--embeddings", d / "embs.txt", "--partition", d / "part.txt",
            "--gate", d / "gate.txt",
            "--n", 3, "--k", 1, "--q", 2, "--seed", 9,
            "--episodes", 25, "--lam", 10,
            "--results", d / "results.tsv", "--report", d / "report.txt",
        )
        outs[rep] = d
    names = [
        "feats.txt", "embs.txt", "planted.txt", "A.txt", "part.txt",
        "gate.txt", "results.tsv", "report.txt",
    ]
    for name in names:
        a = (outs["x"] / name).read_bytes()
        b = (outs["y"] / name).read_bytes()
        assert a == b, f"{name} differs between identical reruns"
    _line(f"cli determinism: PASS ({len(names)} files byte-identical)")


# ---------------------------------------------------------------------------
# secondary component: class-name embedding files
# ---------------------------------------------------------------------------


def test_embedding_file_contract(tmp_path):
    ne = pytest.importorskip("name_embedder")
    from name_embedder.embed import embed_class, mask_one_occurrence
    from name_embedder.model import load_model
    from name_embedder.sentences import SentenceSample
    from name_embedder.writer import write_embeddings

    from facetproto.data_model import parse_class_embeddings

    model = load_model("hash:1024")
    assert model.width == 1024

    sents = [
        "The small lion slept in the shade.",
        "A lion chased the herd across the plain.",
        "Every lion in the pride was counted.",
    ]
    sample = SentenceSample(class_id="lion", name="lion", sentences=tuple(sents))

    # masked tokenization drops every piece of the masked occurrence
    tokens, positions = mask_one_occurrence(sents[0], "lion", model)
    assert positions, "no masked position reported"
    for pos in positions:
        assert tokens[pos] == model.mask_token
    assert all(tok.lower() != "lion" for tok in tokens)

    vec = embed_class(sample, model)
    assert vec.shape == (1024,)

    # averaging matches the vector-mean oracle
    singles = [
        embed_class(
            SentenceSample(class_id="lion", name="lion", sentences=(s,)), model
        )
        for s in sents
    ]
    assert vec == pytest.approx(np.mean(singles, axis=0), abs=1e-6)

    out = tmp_path / "embeddings.txt"
    write_embeddings({"lion": vec, "tiger": singles[0]}, out)
    parsed = parse_class_embeddings(out)
    assert sorted(parsed) == ["lion", "tiger"]
    widths = {e.vector.shape[0] for e in parsed.values()}
    assert widths == {1024}
    _line("embedding file contract: PASS (width 1024, masked, mean oracle)")

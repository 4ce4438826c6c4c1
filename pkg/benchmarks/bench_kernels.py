"""Compare the compiled kernels against the pure-python fallback.

Run:  python benchmarks/bench_kernels.py [--full]

Covers the three hot paths: the Kendall column-pair matrix, per-episode
importance rows, and blended query scoring. Both backends are loaded
directly so the timing does not depend on FACETPROTO_PURE. The default
sizes keep the fallback under a minute; --full selects realistic sizes,
on which the fallback's tau matrix alone takes tens of minutes.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from facetproto.kernels import available_backends
from facetproto.parallel import run_blocks


def _bench(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_tau(backend, m: int, n_v: int, threads: int) -> float:
    rng = np.random.default_rng(0)
    cols = rng.integers(0, 50, size=(m, n_v)).astype(np.float64)
    state = backend.tau_prepare(cols)
    out = np.zeros((n_v, n_v))

    def run():
        run_blocks(lambda lo, hi: backend.tau_block(state, out, lo, hi), n_v, threads)

    return _bench(run, 3)


def bench_importance(backend, t: int, n: int, n_v: int) -> float:
    rng = np.random.default_rng(1)
    feats = rng.normal(size=(t, n_v))
    labels = np.repeat(np.arange(n), t // n).astype(np.int64)
    protos = rng.normal(size=(n, n_v))

    def run():
        for _ in range(20):
            backend.importance_row(feats, labels, protos, 1e-12, 1e6)

    return _bench(run, 3)


def bench_blended(backend, tq: int, n: int, n_v: int) -> float:
    rng = np.random.default_rng(2)
    queries = rng.normal(size=(tq, n_v))
    protos = rng.normal(size=(n, n_v))
    w = np.abs(rng.normal(size=n_v))

    def run():
        for _ in range(200):
            backend.blended_scores(queries, protos, w, 10.0)

    return _bench(run, 3)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--full", action="store_true", help="realistic problem sizes (slow on the fallback)"
    )
    parser.add_argument("--threads", type=int, default=4)
    args = parser.parse_args()

    backends = available_backends()
    if set(backends) == {"pure"}:
        print("compiled backend unavailable; timing the fallback only")

    if args.full:
        tau_shape, imp_shape, blend_shape = (5000, 128), (100, 5, 640), (75, 5, 640)
    else:
        tau_shape, imp_shape, blend_shape = (500, 64), (100, 5, 128), (75, 5, 128)

    rows = []
    timings = {}
    for name, backend in backends.items():
        timings[name] = {
            "tau matrix %dx%d" % tau_shape: bench_tau(backend, *tau_shape, args.threads),
            "importance %d ex, %d-way, n_v=%d" % imp_shape: bench_importance(backend, *imp_shape),
            "blended %d q, %d proto, n_v=%d" % blend_shape: bench_blended(backend, *blend_shape),
        }

    kernels = list(next(iter(timings.values())).keys())
    width = max(len(k) for k in kernels)
    header = f"{'kernel':<{width}}  " + "  ".join(f"{n:>10}" for n in timings)
    if len(timings) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    for k in kernels:
        line = f"{k:<{width}}  " + "  ".join(f"{timings[n][k]*1e3:9.2f}ms" for n in timings)
        if len(timings) == 2:
            pure_t = timings["pure"][k]
            native_t = timings["native"][k]
            line += f"  {pure_t / native_t:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()

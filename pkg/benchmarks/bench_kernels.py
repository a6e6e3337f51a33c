"""Compare the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py
"""

import random
import time

import numpy as np

from mmretrieval.kernels import _pure

try:
    from mmretrieval.kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_bm25(impl, n_docs=200_000, df=50_000, terms=20):
    rng = np.random.default_rng(0)
    scores = np.zeros(n_docs)
    norms = rng.uniform(0.5, 2.0, size=n_docs)
    postings = []
    for _ in range(terms):
        ordinals = np.sort(rng.choice(n_docs, size=df, replace=False)).astype(np.int64)
        tfs = rng.integers(1, 6, size=df).astype(np.float64)
        postings.append((ordinals, tfs, float(rng.uniform(0.1, 3.0))))

    def run():
        scores.fill(0.0)
        for ordinals, tfs, idf in postings:
            impl.bm25_accumulate(scores, ordinals, tfs, idf, 1.2, norms)

    return timeit(run)


def bench_ratcliff(impl, pairs=200, length=80):
    rng = random.Random(7)
    data = [
        (
            "".join(rng.choice("abcdefgh ") for _ in range(length)),
            "".join(rng.choice("abcdefgh ") for _ in range(length)),
        )
        for _ in range(pairs)
    ]

    def run():
        for a, b in data:
            impl.ratcliff_matches(a, b)

    return timeit(run)


def main():
    rows = [("pure", _pure)]
    if _fast is not None:
        rows.append(("compiled", _fast))
    print(f"{'kernel':<18}" + "".join(f"{name:>12}" for name, _ in rows) + f"{'speedup':>10}")
    for label, bench in (("bm25_accumulate", bench_bm25), ("ratcliff_matches", bench_ratcliff)):
        times = [bench(impl) for _, impl in rows]
        speedup = times[0] / times[-1] if len(times) > 1 else 1.0
        print(f"{label:<18}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()

"""Pure-Python (numpy) kernels; fallback when the compiled extension is absent."""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def bm25_accumulate(scores, ordinals, tfs, idf, k1, norms):
    """Add one query term's BM25 contribution to the per-document score array.

    scores: float64[N], mutated in place.
    ordinals: int64 posting ordinals for the term; tfs: float64 term counts.
    norms[d] = k1 * (1 - b + b * dl_d / avgdl), precomputed at build time.
    """
    tf = tfs
    scores[ordinals] += idf * (tf * (k1 + 1.0)) / (tf + norms[ordinals])


def ratcliff_matches(a: str, b: str) -> int:
    """Total characters matched by recursive longest-common-substring pairing.

    Ties between equal-length longest blocks break toward the earliest start
    in `a`, then the earliest start in `b`.
    """
    total = 0
    stack = [(0, len(a), 0, len(b))]
    while stack:
        alo, ahi, blo, bhi = stack.pop()
        if alo >= ahi or blo >= bhi:
            continue
        size, ai, bj = _longest_block(a, alo, ahi, b, blo, bhi)
        if size == 0:
            continue
        total += size
        stack.append((alo, ai, blo, bj))
        stack.append((ai + size, ahi, bj + size, bhi))
    return total


def _longest_block(a, alo, ahi, b, blo, bhi):
    best_size = 0
    best_i = alo
    best_j = blo
    # run[j] = length of the common suffix of a[..i] and b[..j]
    run = [0] * (bhi - blo)
    for i in range(alo, ahi):
        prev = 0
        ch = a[i]
        for j in range(blo, bhi):
            cur = run[j - blo]
            if ch == b[j]:
                length = prev + 1
                run[j - blo] = length
                if length > best_size:
                    best_size = length
                    best_i = i - length + 1
                    best_j = j - length + 1
            else:
                run[j - blo] = 0
            prev = cur
    return best_size, best_i, best_j

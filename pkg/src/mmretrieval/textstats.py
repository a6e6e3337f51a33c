"""Tokenization and the lexical-overlap statistic.

The overlap score is the token-set-ratio: intersection and set differences of
the (lowercased, stopword-filtered) token sets are re-joined into sorted
strings and compared with Gestalt pattern matching, so neither word order nor
duplicate words affect the result.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .kernels import ratcliff_matches

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@lru_cache(maxsize=1)
def stopwords() -> frozenset[str]:
    text = resources.files("mmretrieval.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(tok for tok in text.split() if tok)


def tokenize(text: str, remove_stopwords: bool = False) -> set[str]:
    """Lowercase, split on non-alphanumeric runs, dedup; optionally drop stopwords."""
    tokens = set(_TOKEN_RE.findall(text.lower()))
    if remove_stopwords:
        tokens -= stopwords()
    return tokens


def jaccard(a: set[str], b: set[str]) -> float:
    """|a ∩ b| / |a ∪ b|; 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def gestalt_ratio(s1: str, s2: str) -> float:
    """Ratcliff-Obershelp similarity scaled to [0, 100]; 100 for two empty strings."""
    if not s1 and not s2:
        return 100.0
    matched = ratcliff_matches(s1, s2)
    return 200.0 * matched / (len(s1) + len(s2))


def _join(parts: list[str]) -> str:
    return " ".join(p for p in parts if p)


def token_set_overlap(question: str, doc_text: str) -> float:
    """Order- and duplication-insensitive lexical overlap in [0, 100]."""
    a = tokenize(question, remove_stopwords=True)
    b = tokenize(doc_text, remove_stopwords=True)
    common = " ".join(sorted(a & b))
    t1 = _join([common, " ".join(sorted(a - b))])
    t2 = _join([common, " ".join(sorted(b - a))])
    return max(
        gestalt_ratio(common, t1),
        gestalt_ratio(common, t2),
        gestalt_ratio(t1, t2),
    )


DEFAULT_EDGES = (0.0, 20.0, 40.0, 60.0, 80.0, 100.0)


@dataclass(frozen=True)
class OverlapReport:
    per_query: tuple[tuple[str, float], ...]  # (query id, overlap in [0, 100])
    bins: tuple[tuple[float, float, int], ...]  # (lower edge, upper edge, count)

    def to_json_obj(self) -> dict:
        return {
            "per_query": [{"id": qid, "overlap": score} for qid, score in self.per_query],
            "bins": [{"lo": lo, "hi": hi, "count": n} for lo, hi, n in self.bins],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False)


def bin_index(score: float, edges: tuple[float, ...]) -> int:
    """Bin [lo, hi) except the last bin, which is [lo, 100]."""
    for i in range(len(edges) - 1):
        if edges[i] <= score < edges[i + 1]:
            return i
    return len(edges) - 2


def bucketize(overlaps, edges=DEFAULT_EDGES) -> OverlapReport:
    """Assign (query id, score) pairs to overlap bins covering [0, 100]."""
    edges = tuple(float(e) for e in edges)
    if len(edges) < 2 or any(lo >= hi for lo, hi in zip(edges, edges[1:])):
        raise ValueError("bin edges must be strictly increasing")
    if edges[0] != 0.0 or edges[-1] != 100.0:
        raise ValueError("bin edges must start at 0 and end at 100")
    counts = [0] * (len(edges) - 1)
    per_query = []
    for qid, score in overlaps:
        counts[bin_index(score, edges)] += 1
        per_query.append((qid, float(score)))
    bins = tuple((edges[i], edges[i + 1], counts[i]) for i in range(len(counts)))
    return OverlapReport(per_query=tuple(per_query), bins=bins)

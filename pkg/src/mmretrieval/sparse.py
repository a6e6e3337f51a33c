"""BM25 inverted index over linearized documents.

Lucene-variant scoring: idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)), which is
strictly positive, so any document sharing a term with the query outranks
documents sharing none. Stopwords are kept in the index; idf down-weights them.
"""

from __future__ import annotations

import math
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Document
from .hits import RetrievalHit, hits_from_ranked
from .kernels import bm25_accumulate

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

MAGIC = b"BMI1"
VERSION = 1


class IndexFormatError(ValueError):
    """Raised when a serialized index file is malformed."""


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1 must be positive, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


def index_tokens(text: str) -> list[str]:
    """Indexing tokenization: lowercase alphanumeric runs, duplicates kept."""
    return _TOKEN_RE.findall(text.lower())


class Bm25Index:
    """Immutable inverted index; postings sorted by doc ordinal."""

    def __init__(self, params: Bm25Params, ids: list[str], doc_lengths: np.ndarray,
                 postings: dict[str, tuple[np.ndarray, np.ndarray]]):
        self.params = params
        self.ids = list(ids)
        self.ordinal_of = {doc_id: i for i, doc_id in enumerate(self.ids)}
        self.doc_lengths = np.asarray(doc_lengths, dtype=np.int64)
        self.postings = postings
        self.N = len(self.ids)
        self.avgdl = float(self.doc_lengths.mean())
        # per-doc length normalization, hoisted out of the scoring loop
        self._norms = params.k1 * (1.0 - params.b + params.b * self.doc_lengths / self.avgdl)
        # ordinal -> rank of its id in ascending id order, for deterministic tie-breaks
        order = sorted(range(self.N), key=lambda i: self.ids[i])
        self._id_rank = np.empty(self.N, dtype=np.int64)
        for rank, ordinal in enumerate(order):
            self._id_rank[ordinal] = rank

    def idf(self, term: str) -> float:
        posting = self.postings.get(term)
        if posting is None:
            return 0.0
        df = len(posting[0])
        return math.log(1.0 + (self.N - df + 0.5) / (df + 0.5))

    def save(self, path: str | Path) -> None:
        write_index(self, path)


def build_sparse(corpus: list[Document], params: Bm25Params = Bm25Params()) -> Bm25Index:
    """Index the linearized text of every document."""
    if not corpus:
        raise ValueError("cannot build an index over an empty corpus")
    ids = [doc.id for doc in corpus]
    if len(set(ids)) != len(ids):
        raise ValueError("corpus ids must be unique")
    doc_lengths = np.zeros(len(corpus), dtype=np.int64)
    raw: dict[str, list[tuple[int, int]]] = {}
    for ordinal, doc in enumerate(corpus):
        tokens = index_tokens(doc.linearized)
        doc_lengths[ordinal] = len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            raw.setdefault(term, []).append((ordinal, tf))
    postings = {
        term: (
            np.array([o for o, _ in plist], dtype=np.int64),
            np.array([tf for _, tf in plist], dtype=np.float64),
        )
        for term, plist in raw.items()
    }
    return Bm25Index(params, ids, doc_lengths, postings)


def bm25_score(index: Bm25Index, query_tokens, doc_ordinal: int) -> float:
    """Score one document against the distinct query terms."""
    k1 = index.params.k1
    norm = index._norms[doc_ordinal]
    score = 0.0
    for term in sorted(set(query_tokens)):
        posting = index.postings.get(term)
        if posting is None:
            continue
        ordinals, tfs = posting
        pos = np.searchsorted(ordinals, doc_ordinal)
        if pos == len(ordinals) or ordinals[pos] != doc_ordinal:
            continue
        tf = tfs[pos]
        score += index.idf(term) * (tf * (k1 + 1.0)) / (tf + norm)
    return float(score)


def sparse_search(index: Bm25Index, query: str, k: int) -> list[RetrievalHit]:
    """Exact top-k over all documents sharing at least one query term."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    terms = sorted(set(index_tokens(query)))
    scores = np.zeros(index.N, dtype=np.float64)
    matched = np.zeros(index.N, dtype=bool)
    for term in terms:
        posting = index.postings.get(term)
        if posting is None:
            continue
        ordinals, tfs = posting
        bm25_accumulate(scores, ordinals, tfs, index.idf(term), index.params.k1, index._norms)
        matched[ordinals] = True
    candidates = np.flatnonzero(matched)
    if candidates.size == 0:
        return []
    # primary key: score descending; secondary: doc id ascending
    order = np.lexsort((index._id_rank[candidates], -scores[candidates]))
    top = candidates[order[:k]]
    return hits_from_ranked((index.ids[o] for o in top), scores[top])


def _write_str(buf, s: str) -> None:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ValueError(f"string too long to serialize: {len(data)} bytes")
    buf.write(struct.pack("<H", len(data)))
    buf.write(data)


class _Reader:
    def __init__(self, fh, path):
        self.fh = fh
        self.path = path

    def take(self, n: int) -> bytes:
        data = self.fh.read(n)
        if len(data) != n:
            raise IndexFormatError(f"{self.path}: truncated index file")
        return data

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def read_str(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")


def write_index(index: Bm25Index, path: str | Path) -> None:
    """BMI1 layout (all little-endian):

    magic "BMI1", u32 version, f64 k1, f64 b, u64 N,
    per doc: u16 id-length, id UTF-8 bytes, u32 doc length,
    u64 term count, per term (sorted): u16 term-length, term UTF-8 bytes,
    u32 df, df x (u32 ordinal, u32 tf).
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<dd", index.params.k1, index.params.b))
        fh.write(struct.pack("<Q", index.N))
        for doc_id, dl in zip(index.ids, index.doc_lengths):
            _write_str(fh, doc_id)
            fh.write(struct.pack("<I", int(dl)))
        terms = sorted(index.postings)
        fh.write(struct.pack("<Q", len(terms)))
        for term in terms:
            ordinals, tfs = index.postings[term]
            _write_str(fh, term)
            fh.write(struct.pack("<I", len(ordinals)))
            for o, tf in zip(ordinals, tfs):
                fh.write(struct.pack("<II", int(o), int(tf)))


def read_index(path: str | Path) -> Bm25Index:
    with open(path, "rb") as fh:
        r = _Reader(fh, path)
        if r.take(4) != MAGIC:
            raise IndexFormatError(f"{path}: bad magic, not a BMI1 index file")
        (version,) = r.unpack("<I")
        if version != VERSION:
            raise IndexFormatError(f"{path}: unsupported index version {version}")
        k1, b = r.unpack("<dd")
        (n_docs,) = r.unpack("<Q")
        ids = []
        doc_lengths = np.empty(n_docs, dtype=np.int64)
        for i in range(n_docs):
            ids.append(r.read_str())
            (doc_lengths[i],) = r.unpack("<I")
        (n_terms,) = r.unpack("<Q")
        postings = {}
        for _ in range(n_terms):
            term = r.read_str()
            (df,) = r.unpack("<I")
            ordinals = np.empty(df, dtype=np.int64)
            tfs = np.empty(df, dtype=np.float64)
            for j in range(df):
                ordinals[j], tfs[j] = r.unpack("<II")
            postings[term] = (ordinals, tfs)
        if fh.read(1):
            raise IndexFormatError(f"{path}: trailing bytes after index payload")
    return Bm25Index(Bm25Params(k1=k1, b=b), ids, doc_lengths, postings)

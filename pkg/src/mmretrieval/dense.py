"""Dense retrieval: id-aligned embedding matrices, exact top-k search, and a
deterministic feature-hashing embedder so the engine runs without a trainer.

Search is an exact brute-force scan; at desk scale this keeps evaluation
attributable to the embeddings rather than to index approximation.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .hits import RetrievalHit, hits_from_ranked
from .textstats import tokenize

MAGIC = b"EMB1"
VERSION = 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


class EmbeddingFormatError(ValueError):
    """Raised when an EMB1 file is malformed."""


class SimilarityMetric(str, Enum):
    DOT = "dot"
    COSINE = "cosine"


@dataclass(frozen=True)
class EmbeddingMatrix:
    ids: tuple[str, ...]
    vectors: np.ndarray  # float32, shape (len(ids), dim)

    def __post_init__(self):
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D matrix")
        object.__setattr__(self, "vectors", vectors)
        if len(self.ids) != vectors.shape[0]:
            raise ValueError(f"{len(self.ids)} ids but {vectors.shape[0]} vector rows")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("embedding ids must be unique")
        if not np.isfinite(vectors).all():
            row = int(np.argwhere(~np.isfinite(vectors).all(axis=1))[0][0])
            raise ValueError(f"non-finite value in vector row {row} (id {self.ids[row]!r})")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


def write_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    """EMB1: "EMB1", u32-LE version=1, u32-LE dim, u64-LE count, then per
    record u16-LE id byte length, id UTF-8 bytes, dim x f32-LE."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIQ", VERSION, m.dim, len(m.ids)))
        for row_id, row in zip(m.ids, m.vectors):
            data = row_id.encode("utf-8")
            fh.write(struct.pack("<H", len(data)))
            fh.write(data)
            fh.write(row.astype("<f4", copy=False).tobytes())


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        header = fh.read(4)
        if header != MAGIC:
            raise EmbeddingFormatError(f"{path}: bad magic, not an EMB1 file")
        fixed = fh.read(16)
        if len(fixed) != 16:
            raise EmbeddingFormatError(f"{path}: truncated header")
        version, dim, count = struct.unpack("<IIQ", fixed)
        if version != VERSION:
            raise EmbeddingFormatError(f"{path}: unsupported version {version}")
        ids = []
        vectors = np.empty((count, dim), dtype=np.float32)
        row_bytes = 4 * dim
        for row in range(count):
            lead = fh.read(2)
            if len(lead) != 2:
                raise EmbeddingFormatError(f"{path}: truncated at record {row}")
            (id_len,) = struct.unpack("<H", lead)
            id_data = fh.read(id_len)
            vec_data = fh.read(row_bytes)
            if len(id_data) != id_len or len(vec_data) != row_bytes:
                raise EmbeddingFormatError(f"{path}: truncated at record {row}")
            ids.append(id_data.decode("utf-8"))
            vectors[row] = np.frombuffer(vec_data, dtype="<f4")
        if fh.read(1):
            raise EmbeddingFormatError(f"{path}: trailing bytes after last record")
    for row in range(count):
        if not np.isfinite(vectors[row]).all():
            raise EmbeddingFormatError(f"{path}: non-finite value in vector row {row} (id {ids[row]!r})")
    return EmbeddingMatrix(ids=tuple(ids), vectors=vectors)


def dense_search(docs: EmbeddingMatrix, query_vec: np.ndarray, k: int,
                 metric: SimilarityMetric = SimilarityMetric.DOT) -> list[RetrievalHit]:
    """Exact top-k by dot product or cosine; ties break by ascending doc id."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    query = np.asarray(query_vec, dtype=np.float32).reshape(-1)
    if query.shape[0] != docs.dim:
        raise ValueError(f"query dim {query.shape[0]} != index dim {docs.dim}")
    vectors = docs.vectors
    if metric is SimilarityMetric.COSINE:
        q_norm = np.linalg.norm(query)
        if q_norm == 0.0:
            raise ValueError("zero query vector is undefined under cosine similarity")
        row_norms = np.linalg.norm(vectors, axis=1)
        if (row_norms == 0.0).any():
            row = int(np.argwhere(row_norms == 0.0)[0][0])
            raise ValueError(f"zero document vector (id {docs.ids[row]!r}) is undefined under cosine similarity")
        scores = (vectors @ query) / (row_norms * q_norm)
    else:
        scores = vectors @ query
    id_rank = np.argsort(np.argsort(np.array(docs.ids)))
    order = np.lexsort((id_rank, -scores.astype(np.float64)))[:k]
    return hits_from_ranked((docs.ids[i] for i in order), scores[order])


def _fnv1a64(data: bytes, seed: int) -> int:
    h = (FNV_OFFSET ^ (seed & _MASK64)) & _MASK64
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def hash_embed(text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Feature-hash the token set of `text` into an L2-normalized float32 vector.

    Each token's seeded 64-bit FNV-1a hash picks a coordinate (low bits, mod
    dim) and a sign (bit 63). Deterministic across platforms.
    """
    if dim < 8:
        raise ValueError(f"dim must be at least 8, got {dim}")
    tokens = tokenize(text)
    if not tokens:
        raise ValueError("cannot embed text with zero tokens")
    vec = np.zeros(dim, dtype=np.float64)
    for token in sorted(tokens):
        h = _fnv1a64(token.encode("utf-8"), seed)
        sign = -1.0 if (h >> 63) & 1 else 1.0
        vec[h % dim] += sign
    norm = np.linalg.norm(vec)
    if norm == 0.0:
        # sign collisions can cancel everything out
        raise ValueError("hashed features cancelled to the zero vector")
    return (vec / norm).astype(np.float32)


def embed_texts(texts, ids, dim: int, seed: int = 0) -> EmbeddingMatrix:
    vectors = np.stack([hash_embed(t, dim, seed) for t in texts])
    return EmbeddingMatrix(ids=tuple(ids), vectors=vectors)

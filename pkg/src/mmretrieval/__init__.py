"""Joint retrieval of text passages and linearized tables.

Sparse BM25 and exact dense retrieval over one mixed corpus, hard-negative
mining, and a recall@k evaluation harness with lexical-overlap stratification.
"""

from .corpus import (
    Dataset,
    Document,
    MatchProtocol,
    Modality,
    Passage,
    QueryRecord,
    Table,
    linearize,
)
from .dense import EmbeddingMatrix, SimilarityMetric, dense_search, hash_embed, read_embeddings, write_embeddings
from .hits import RetrievalHit
from .sparse import Bm25Index, Bm25Params, bm25_score, build_sparse, sparse_search

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "Document",
    "MatchProtocol",
    "Modality",
    "Passage",
    "QueryRecord",
    "Table",
    "linearize",
    "EmbeddingMatrix",
    "SimilarityMetric",
    "dense_search",
    "hash_embed",
    "read_embeddings",
    "write_embeddings",
    "RetrievalHit",
    "Bm25Index",
    "Bm25Params",
    "bm25_score",
    "build_sparse",
    "sparse_search",
    "__version__",
]

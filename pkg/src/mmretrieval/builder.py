"""Mixed-corpus assembly, context-independence filtering, and BM25 hard-negative mining.

A hard negative for a question is the highest-BM25-ranked document that does
not contain any of its answer strings and is not a gold document. Mining runs
over the mixed text+table index, so negatives may cross modalities.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .corpus import Document, Modality, Passage, QueryRecord, Table
from .evaluation import answer_in_text
from .sparse import Bm25Index, sparse_search

log = logging.getLogger(__name__)

DEFAULT_MAX_CANDIDATES = 100

CONTEXT_INDEPENDENT = "context_independent"
UNDER_SPECIFIED = "under_specified"


class NoNegativeFound(LookupError):
    """No qualifying hard-negative candidate within the search depth."""


@dataclass(frozen=True)
class TrainingSample:
    question: str
    positive_id: str
    hard_negative_id: str
    positive_modality: str
    negative_modality: str

    def to_json_obj(self) -> dict:
        return {
            "question": self.question,
            "positive_id": self.positive_id,
            "hard_negative_id": self.hard_negative_id,
            "positive_modality": self.positive_modality,
            "negative_modality": self.negative_modality,
        }


def build_mixed_corpus(passages: list[Passage], tables: list[Table], sample_size: int,
                       required_ids: set[str], seed: int = 0) -> list[Document]:
    """Required passages plus a uniform passage sample up to `sample_size`
    passages total, plus ALL tables. Deterministic for a fixed seed."""
    if sample_size > len(passages):
        raise ValueError(f"sample_size {sample_size} exceeds passage count {len(passages)}")
    passage_ids = {p.id for p in passages}
    table_ids = {t.id for t in tables}
    for rid in sorted(required_ids):
        if rid not in passage_ids and rid not in table_ids:
            raise ValueError(f"required id {rid!r} is in neither passages nor tables")
    required_passage_idx = [i for i, p in enumerate(passages) if p.id in required_ids]
    remaining = [i for i, p in enumerate(passages) if p.id not in required_ids]
    n_extra = max(0, sample_size - len(required_passage_idx))
    extra = random.Random(seed).sample(remaining, n_extra)
    chosen = sorted(required_passage_idx + extra)
    docs = [Document(passages[i]) for i in chosen]
    docs.extend(Document(t) for t in tables)
    return docs


def apply_context_filter(queries: list[QueryRecord], labels: str | Path) -> list[QueryRecord]:
    """Keep only queries labeled context-independent; order preserved."""
    label_of: dict[str, str] = {}
    with open(labels, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            label = obj["label"]
            if label not in (CONTEXT_INDEPENDENT, UNDER_SPECIFIED):
                raise ValueError(f"{labels}: line {lineno}: unknown label {label!r}")
            label_of[str(obj["id"])] = label
    for query in queries:
        if query.id not in label_of:
            raise ValueError(f"query {query.id!r} missing from label file {labels}")
    return [q for q in queries if label_of[q.id] == CONTEXT_INDEPENDENT]


def mine_hard_negative(query: QueryRecord, index: Bm25Index, corpus: list[Document],
                       max_candidates: int = DEFAULT_MAX_CANDIDATES) -> str:
    """Highest-ranked BM25 hit that contains no answer string and is not gold."""
    if max_candidates < 1:
        raise ValueError(f"max_candidates must be at least 1, got {max_candidates}")
    docs_by_id = {doc.id: doc for doc in corpus}
    for hit in sparse_search(index, query.question, max_candidates):
        if hit.doc_id in query.gold_ids:
            continue
        doc = docs_by_id[hit.doc_id]
        if query.answers and answer_in_text(doc.linearized, query.answers):
            continue
        return hit.doc_id
    raise NoNegativeFound(f"query {query.id!r}: no qualifying negative in top {max_candidates}")


def mine_training_samples(queries: list[QueryRecord], index: Bm25Index, corpus: list[Document],
                          max_candidates: int = DEFAULT_MAX_CANDIDATES) -> list[TrainingSample]:
    """One hard negative per query; queries without one are dropped and counted."""
    docs_by_id = {doc.id: doc for doc in corpus}
    samples = []
    skipped = 0
    for query in queries:
        if not query.gold_ids:
            skipped += 1
            continue
        positive_id = min(query.gold_ids)
        positive = docs_by_id.get(positive_id)
        if positive is None:
            skipped += 1
            continue
        try:
            negative_id = mine_hard_negative(query, index, corpus, max_candidates)
        except NoNegativeFound:
            skipped += 1
            continue
        samples.append(
            TrainingSample(
                question=query.question,
                positive_id=positive_id,
                hard_negative_id=negative_id,
                positive_modality=positive.modality.value,
                negative_modality=docs_by_id[negative_id].modality.value,
            )
        )
    if skipped:
        log.info("dropped %d of %d queries without a usable training sample", skipped, len(queries))
    return samples

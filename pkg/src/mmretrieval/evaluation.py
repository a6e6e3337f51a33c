"""Recall@k evaluation with two correctness protocols.

Answer-string protocol: a hit counts if the document's linearized text
contains any gold answer as a substring (after lowercasing and whitespace
collapsing). Gold-id protocol: a hit counts only if it IS an annotated gold
document, regardless of what text it contains.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .corpus import Document, MatchProtocol, QueryRecord
from .hits import RetrievalHit
from .textstats import DEFAULT_EDGES, bin_index, token_set_overlap

DEFAULT_KS = (10, 20, 100)


@dataclass(frozen=True)
class EvalConfig:
    ks: tuple[int, ...] = DEFAULT_KS
    sample_n: int | None = 1000
    seed: int = 0
    metric_source: str = "sparse"  # informational tag for reports

    def __post_init__(self):
        if list(self.ks) != sorted(self.ks) or any(k < 1 for k in self.ks):
            raise ValueError("ks must be ascending and all >= 1")


def normalize_text(text: str) -> str:
    """Lowercase and collapse whitespace runs to single spaces."""
    return " ".join(text.lower().split())


def sample_queries(queries: list[QueryRecord], n: int | None, seed: int = 0) -> list[QueryRecord]:
    """Uniform sample without replacement, stable in original order."""
    if n is None or n == len(queries):
        return list(queries)
    if n > len(queries):
        raise ValueError(f"cannot sample {n} of {len(queries)} queries")
    chosen = sorted(random.Random(seed).sample(range(len(queries)), n))
    return [queries[i] for i in chosen]


def answer_match(doc: Document, query: QueryRecord) -> bool:
    if query.protocol is not MatchProtocol.ANSWER_STRING:
        raise ValueError(f"query {query.id!r} does not use the answer-string protocol")
    return answer_in_text(doc.linearized, query.answers)


def answer_in_text(doc_text: str, answers) -> bool:
    normalized = normalize_text(doc_text)
    return any(normalize_text(a) in normalized for a in answers)


def gold_match(doc_id: str, query: QueryRecord) -> bool:
    if query.protocol is not MatchProtocol.GOLD_ID:
        raise ValueError(f"query {query.id!r} does not use the gold-id protocol")
    return doc_id in query.gold_ids


def hit_is_correct(hit: RetrievalHit, query: QueryRecord, docs_by_id: dict[str, Document]) -> bool:
    if query.protocol is MatchProtocol.GOLD_ID:
        return gold_match(hit.doc_id, query)
    doc = docs_by_id.get(hit.doc_id)
    return doc is not None and answer_match(doc, query)


def first_correct_rank(hits: list[RetrievalHit], query: QueryRecord,
                       docs_by_id: dict[str, Document]) -> int | None:
    for hit in hits:
        if hit_is_correct(hit, query, docs_by_id):
            return hit.rank
    return None


@dataclass(frozen=True)
class RecallTable:
    ks: tuple[int, ...]
    per_dataset: dict[str, dict[int, float]]
    counts: dict[str, int]
    overall: dict[int, float]

    def to_json_obj(self) -> dict:
        return {
            "ks": list(self.ks),
            "per_dataset": {d: {str(k): v for k, v in row.items()} for d, row in self.per_dataset.items()},
            "counts": dict(self.counts),
            "overall": {str(k): v for k, v in self.overall.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), ensure_ascii=False, indent=2)

    def render(self) -> str:
        """Human-readable fixed-width table."""
        header = "dataset".ljust(16) + "queries".rjust(8) + "".join(f"R@{k}".rjust(10) for k in self.ks)
        lines = [header]
        for dataset in sorted(self.per_dataset):
            row = self.per_dataset[dataset]
            lines.append(
                dataset.ljust(16) + str(self.counts[dataset]).rjust(8)
                + "".join(f"{row[k]:.4f}".rjust(10) for k in self.ks)
            )
        total = sum(self.counts.values())
        lines.append("overall".ljust(16) + str(total).rjust(8) + "".join(f"{self.overall[k]:.4f}".rjust(10) for k in self.ks))
        return "\n".join(lines)


def recall_at_k(runs: dict[str, list[RetrievalHit]], queries: list[QueryRecord],
                docs_by_id: dict[str, Document], ks=DEFAULT_KS) -> RecallTable:
    """Fraction of queries with a correct hit in the top k, per dataset and overall."""
    ks = tuple(ks)
    hits_per_dataset: dict[str, list[int | None]] = {}
    for query in queries:
        rank = first_correct_rank(runs.get(query.id, []), query, docs_by_id)
        hits_per_dataset.setdefault(query.dataset.value, []).append(rank)
    per_dataset = {}
    counts = {}
    for dataset, ranks in hits_per_dataset.items():
        counts[dataset] = len(ranks)
        per_dataset[dataset] = {k: sum(1 for r in ranks if r is not None and r <= k) / len(ranks) for k in ks}
    all_ranks = [r for ranks in hits_per_dataset.values() for r in ranks]
    overall = {
        k: (sum(1 for r in all_ranks if r is not None and r <= k) / len(all_ranks)) if all_ranks else 0.0
        for k in ks
    }
    return RecallTable(ks=ks, per_dataset=per_dataset, counts=counts, overall=overall)


def query_overlap(query: QueryRecord, docs_by_id: dict[str, Document]) -> float:
    """Lexical overlap of the question with its gold documents (max over golds)."""
    golds = [docs_by_id[g] for g in query.gold_ids if g in docs_by_id]
    if not golds:
        raise ValueError(f"query {query.id!r}: no gold document present in corpus")
    return max(token_set_overlap(query.question, g.linearized) for g in golds)


def stratified_recall(runs: dict[str, list[RetrievalHit]], queries: list[QueryRecord],
                      docs_by_id: dict[str, Document], k: int,
                      edges=DEFAULT_EDGES) -> list[dict]:
    """Recall@k per lexical-overlap bin; empty bins report recall None."""
    edges = tuple(float(e) for e in edges)
    totals = [0] * (len(edges) - 1)
    correct = [0] * (len(edges) - 1)
    for query in queries:
        overlap = query_overlap(query, docs_by_id)
        bucket = bin_index(overlap, edges)
        totals[bucket] += 1
        rank = first_correct_rank(runs.get(query.id, []), query, docs_by_id)
        if rank is not None and rank <= k:
            correct[bucket] += 1
    return [
        {
            "lo": edges[i],
            "hi": edges[i + 1],
            "count": totals[i],
            "recall": (correct[i] / totals[i]) if totals[i] else None,
        }
        for i in range(len(totals))
    ]

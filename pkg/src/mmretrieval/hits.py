"""Retrieval hit type shared by the sparse and dense searchers."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class RetrievalHit:
    doc_id: str
    score: float
    rank: int  # 1-based


def hits_from_ranked(ids, scores) -> list[RetrievalHit]:
    return [RetrievalHit(doc_id=i, score=float(s), rank=r) for r, (i, s) in enumerate(zip(ids, scores), start=1)]

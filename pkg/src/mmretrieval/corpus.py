"""Documents, queries and table linearization.

A corpus mixes two modalities: plain text passages and tables flattened to
one-dimensional strings. Both are wrapped in :class:`Document`, the unit of
indexing and retrieval everywhere else in the package.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

SEGMENT_SEP = " | "
CELL_SEP = " , "

TEXT_PREFIX = "text:"
TABLE_PREFIX = "table:"


class IngestError(ValueError):
    """Raised for malformed or inconsistent dataset files."""


class Modality(str, Enum):
    TEXT = "text"
    TABLE = "table"


@dataclass(frozen=True)
class Passage:
    id: str
    title: str
    body: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("passage id must be non-empty")
        if not self.body:
            raise ValueError(f"passage {self.id!r}: body must be non-empty")


@dataclass(frozen=True)
class Table:
    id: str
    page_title: str
    section_title: str
    caption: str
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if not self.id:
            raise ValueError("table id must be non-empty")
        if len(self.header) < 1:
            raise ValueError(f"table {self.id!r}: header must have at least one cell")
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(f"table {self.id!r}: row arity {len(row)} != header arity {len(self.header)}")


@dataclass(frozen=True)
class Document:
    """Tagged union of Passage | Table with its cached linearized form."""

    payload: Passage | Table
    modality: Modality = field(init=False)
    linearized: str = field(init=False)

    def __post_init__(self):
        modality = Modality.TABLE if isinstance(self.payload, Table) else Modality.TEXT
        object.__setattr__(self, "modality", modality)
        object.__setattr__(self, "linearized", linearize_payload(self.payload))

    @property
    def id(self) -> str:
        return self.payload.id


class Dataset(str, Enum):
    NQ = "nq"
    NQ_TABLES = "nq_tables"
    WIKISQL = "wikisql"
    WIKISQL_CTX = "wikisql_ctx"
    OTTQA = "ottqa"
    MULTIMODAL = "multimodal"


class MatchProtocol(str, Enum):
    ANSWER_STRING = "answer_string"
    GOLD_ID = "gold_id"


@dataclass(frozen=True)
class QueryRecord:
    id: str
    question: str
    dataset: Dataset
    gold_ids: frozenset[str]
    answers: tuple[str, ...]
    protocol: MatchProtocol
    hard_negative_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.protocol is MatchProtocol.ANSWER_STRING and not self.answers:
            raise ValueError(f"query {self.id!r}: answer_string protocol requires answers")
        if self.protocol is MatchProtocol.GOLD_ID and not self.gold_ids:
            raise ValueError(f"query {self.id!r}: gold_id protocol requires gold ids")


def _escape(cell: str) -> str:
    # literal "|" would collide with the segment separator
    return cell.replace("|", "/")


def linearize_payload(payload: Passage | Table) -> str:
    """Flatten a passage or table to a single string.

    Segments (titles, caption, each row) are joined with " | "; cells within
    a row with " , ". Empty segments are skipped so separators never double.
    Deterministic and idempotent.
    """
    if isinstance(payload, Passage):
        segments = [payload.title, payload.body]
    else:
        segments = [payload.page_title, payload.section_title, payload.caption]
        segments.append(CELL_SEP.join(_escape(c) for c in payload.header))
        for row in payload.rows:
            segments.append(CELL_SEP.join(_escape(c) for c in row))
    return SEGMENT_SEP.join(_escape(s) for s in segments if s)


def linearize(doc: Document) -> str:
    return doc.linearized


def normalize_row(row: list[str], arity: int) -> tuple[tuple[str, ...], bool]:
    """Pad short rows with empty cells, truncate long ones. Returns (row, truncated)."""
    if len(row) < arity:
        return tuple(row) + ("",) * (arity - len(row)), False
    if len(row) > arity:
        return tuple(row[:arity]), True
    return tuple(row), False


def _iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(f"{path}: malformed JSON on line {lineno}: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise IngestError(f"{path}: malformed JSON on line {lineno}: expected object")
            yield lineno, obj


def _require(obj: dict, key: str, path, lineno: int):
    if key not in obj:
        raise IngestError(f"{path}: line {lineno}: missing field {key!r}")
    return obj[key]


def _check_duplicate(seen: set, doc_id: str, path, lineno: int):
    if doc_id in seen:
        raise IngestError(f"{path}: line {lineno}: duplicate id {doc_id!r}")
    seen.add(doc_id)


def qualify_id(raw_id: str, modality: Modality) -> str:
    """Prefix ids with their modality namespace unless already prefixed."""
    prefix = TABLE_PREFIX if modality is Modality.TABLE else TEXT_PREFIX
    return raw_id if raw_id.startswith(prefix) else prefix + raw_id


def ingest_passages(path: str | Path) -> list[Passage]:
    """Load passages from JSONL ({"id", "title", "text"}), one object per line."""
    passages = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        doc_id = qualify_id(str(_require(obj, "id", path, lineno)), Modality.TEXT)
        _check_duplicate(seen, doc_id, path, lineno)
        passages.append(
            Passage(id=doc_id, title=str(obj.get("title", "")), body=str(_require(obj, "text", path, lineno)))
        )
    return passages


def ingest_tables(path: str | Path) -> list[Table]:
    """Load tables from JSONL; rows are normalized to header arity."""
    tables = []
    seen: set[str] = set()
    truncated = 0
    for lineno, obj in _iter_jsonl(path):
        doc_id = qualify_id(str(_require(obj, "id", path, lineno)), Modality.TABLE)
        _check_duplicate(seen, doc_id, path, lineno)
        header = tuple(str(c) for c in _require(obj, "header", path, lineno))
        if not header:
            raise IngestError(f"{path}: line {lineno}: table {doc_id!r} has empty header")
        rows = []
        for raw_row in obj.get("rows", []):
            row, was_truncated = normalize_row([str(c) for c in raw_row], len(header))
            truncated += was_truncated
            rows.append(row)
        tables.append(
            Table(
                id=doc_id,
                page_title=str(obj.get("page_title", "")),
                section_title=str(obj.get("section_title", "")),
                caption=str(obj.get("caption", "")),
                header=header,
                rows=tuple(rows),
            )
        )
    if truncated:
        log.warning("%s: truncated %d over-long rows to header arity", path, truncated)
    return tables


def ingest_queries(path: str | Path) -> list[QueryRecord]:
    """Load query records from JSONL (schema in README)."""
    queries = []
    seen: set[str] = set()
    for lineno, obj in _iter_jsonl(path):
        qid = str(_require(obj, "id", path, lineno))
        _check_duplicate(seen, qid, path, lineno)
        try:
            dataset = Dataset(str(_require(obj, "dataset", path, lineno)))
            protocol = MatchProtocol(str(_require(obj, "protocol", path, lineno)))
        except ValueError as exc:
            raise IngestError(f"{path}: line {lineno}: {exc}") from exc
        hard_negatives = obj.get("hard_negative_ids")
        try:
            queries.append(
                QueryRecord(
                    id=qid,
                    question=str(_require(obj, "question", path, lineno)),
                    dataset=dataset,
                    gold_ids=frozenset(str(g) for g in obj.get("gold_ids", [])),
                    answers=tuple(str(a) for a in obj.get("answers", [])),
                    protocol=protocol,
                    hard_negative_ids=tuple(str(h) for h in hard_negatives) if hard_negatives is not None else None,
                )
            )
        except ValueError as exc:
            raise IngestError(f"{path}: line {lineno}: {exc}") from exc
    return queries


def load_corpus(paths: Iterable[str | Path]) -> list[Document]:
    """Load a mixed corpus from one or more JSONL files.

    Lines with a "header" field parse as tables, others as passages; ids must
    be globally unique across all files.
    """
    docs: list[Document] = []
    seen: set[str] = set()
    for path in paths:
        for lineno, obj in _iter_jsonl(path):
            if "header" in obj:
                table = _table_from_obj(obj, path, lineno)
                _check_duplicate(seen, table.id, path, lineno)
                docs.append(Document(table))
            else:
                doc_id = qualify_id(str(_require(obj, "id", path, lineno)), Modality.TEXT)
                _check_duplicate(seen, doc_id, path, lineno)
                docs.append(
                    Document(Passage(id=doc_id, title=str(obj.get("title", "")), body=str(_require(obj, "text", path, lineno))))
                )
    return docs


def _table_from_obj(obj: dict, path, lineno: int) -> Table:
    doc_id = qualify_id(str(_require(obj, "id", path, lineno)), Modality.TABLE)
    header = tuple(str(c) for c in obj["header"])
    if not header:
        raise IngestError(f"{path}: line {lineno}: table {doc_id!r} has empty header")
    rows = tuple(normalize_row([str(c) for c in r], len(header))[0] for r in obj.get("rows", []))
    return Table(
        id=doc_id,
        page_title=str(obj.get("page_title", "")),
        section_title=str(obj.get("section_title", "")),
        caption=str(obj.get("caption", "")),
        header=header,
        rows=rows,
    )


def passage_to_obj(p: Passage) -> dict:
    return {"id": p.id, "title": p.title, "text": p.body}


def table_to_obj(t: Table) -> dict:
    return {
        "id": t.id,
        "page_title": t.page_title,
        "section_title": t.section_title,
        "caption": t.caption,
        "header": list(t.header),
        "rows": [list(r) for r in t.rows],
    }


def document_to_obj(doc: Document) -> dict:
    if doc.modality is Modality.TABLE:
        return table_to_obj(doc.payload)
    return passage_to_obj(doc.payload)


def query_to_obj(q: QueryRecord) -> dict:
    obj = {
        "id": q.id,
        "question": q.question,
        "dataset": q.dataset.value,
        "gold_ids": sorted(q.gold_ids),
        "answers": list(q.answers),
        "protocol": q.protocol.value,
    }
    if q.hard_negative_ids is not None:
        obj["hard_negative_ids"] = list(q.hard_negative_ids)
    return obj

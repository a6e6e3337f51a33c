import pytest

from mmretrieval.corpus import (
    Document,
    IngestError,
    Modality,
    Passage,
    Table,
    ingest_passages,
    ingest_queries,
    ingest_tables,
    linearize,
    load_corpus,
    normalize_row,
)
from conftest import make_table, write_jsonl


def test_ingest_passages_in_file_order(tmp_path):
    path = tmp_path / "p.jsonl"
    write_jsonl(path, [
        {"id": "a", "title": "A", "text": "first"},
        {"id": "b", "title": "B", "text": "second"},
    ])
    passages = ingest_passages(path)
    assert [p.id for p in passages] == ["text:a", "text:b"]
    assert passages[0].body == "first"


def test_ingest_empty_file(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text("")
    assert ingest_passages(path) == []


def test_ingest_malformed_line_names_line_number(tmp_path):
    path = tmp_path / "p.jsonl"
    path.write_text(
        '{"id": "a", "title": "", "text": "x"}\n'
        '{"id": "b", "title": "", "text": "y"}\n'
        "{oops\n"
    )
    with pytest.raises(IngestError, match="line 3"):
        ingest_passages(path)


def test_ingest_duplicate_id_names_id(tmp_path):
    path = tmp_path / "p.jsonl"
    write_jsonl(path, [
        {"id": "a", "title": "", "text": "x"},
        {"id": "a", "title": "", "text": "y"},
    ])
    with pytest.raises(IngestError, match="text:a"):
        ingest_passages(path)


def test_ingest_tables_pads_short_rows(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [{"id": "t", "header": ["a", "b", "c"], "rows": [["1"]]}])
    (table,) = ingest_tables(path)
    assert table.rows == (("1", "", ""),)


def test_ingest_tables_truncates_long_rows(tmp_path):
    path = tmp_path / "t.jsonl"
    write_jsonl(path, [{"id": "t", "header": ["a"], "rows": [["1", "2", "3"]]}])
    (table,) = ingest_tables(path)
    assert table.rows == (("1",),)


def test_normalize_row_reports_truncation():
    assert normalize_row(["1", "2"], 1) == (("1",), True)
    assert normalize_row(["1"], 2) == (("1", ""), False)


def test_id_prefixing_is_idempotent(tmp_path):
    path = tmp_path / "p.jsonl"
    write_jsonl(path, [{"id": "text:a", "title": "", "text": "x"}])
    assert ingest_passages(path)[0].id == "text:a"


def test_linearize_table_example():
    doc = make_table("x", page="A", section="B", caption="C", header=["H1", "H2"], rows=[["x", "y"]])
    assert doc.linearized == "A | B | C | H1 , H2 | x , y"


def test_linearize_skips_empty_caption():
    doc = make_table("x", page="A", section="B", caption="", header=["H1"], rows=[])
    assert doc.linearized == "A | B | H1"
    assert "||" not in doc.linearized and "|  |" not in doc.linearized


def test_linearize_passage():
    doc = Document(Passage(id="text:p", title="T", body="b"))
    assert doc.linearized == "T | b"


def test_linearize_escapes_pipes():
    doc = make_table("x", caption="a|b", header=["h"], rows=[])
    assert doc.linearized == "a/b | h"


def test_linearize_deterministic_and_idempotent():
    doc = make_table("x", page="P", header=["h1", "h2"], rows=[["1", "2"], ["3", "4"]])
    again = make_table("x", page="P", header=["h1", "h2"], rows=[["1", "2"], ["3", "4"]])
    assert linearize(doc) == linearize(again)


def test_linearize_injective_on_cell_change():
    a = make_table("x", header=["h"], rows=[["1"]])
    b = make_table("x", header=["h"], rows=[["2"]])
    assert a.linearized != b.linearized


def test_document_modality_matches_variant(tiny_corpus):
    assert tiny_corpus[0].modality is Modality.TEXT
    assert tiny_corpus[2].modality is Modality.TABLE


def test_table_invariants():
    with pytest.raises(ValueError):
        Table(id="t", page_title="", section_title="", caption="", header=(), rows=())
    with pytest.raises(ValueError):
        Passage(id="", title="t", body="b")


def test_ingest_queries_protocol_invariants(tmp_path):
    path = tmp_path / "q.jsonl"
    write_jsonl(path, [{
        "id": "q1", "question": "who?", "dataset": "nq",
        "gold_ids": [], "answers": [], "protocol": "answer_string",
    }])
    with pytest.raises(IngestError, match="q1"):
        ingest_queries(path)


def test_load_corpus_mixed_schema_dispatch(tmp_path):
    path = tmp_path / "c.jsonl"
    write_jsonl(path, [
        {"id": "p", "title": "T", "text": "body"},
        {"id": "t", "header": ["h"], "rows": [["v"]]},
    ])
    docs = load_corpus([path])
    assert [d.modality for d in docs] == [Modality.TEXT, Modality.TABLE]
    assert {d.id for d in docs} == {"text:p", "table:t"}

import json
import os
from pathlib import Path

import pytest

from mmretrieval.cli import build_parser, run_command
from conftest import write_jsonl

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def workspace(tmp_path):
    passages = tmp_path / "passages.jsonl"
    tables = tmp_path / "tables.jsonl"
    queries = tmp_path / "queries.jsonl"
    write_jsonl(passages, [
        {"id": "p1", "title": "Paris", "text": "paris is the capital of france"},
        {"id": "p2", "title": "Berlin", "text": "berlin is the capital of germany"},
        {"id": "p3", "title": "Rome", "text": "rome is the capital of italy"},
    ])
    write_jsonl(tables, [
        {"id": "t1", "page_title": "Capitals", "section_title": "", "caption": "",
         "header": ["city", "country"], "rows": [["madrid", "spain"]]},
    ])
    write_jsonl(queries, [
        {"id": "q1", "question": "capital of france", "dataset": "nq",
         "gold_ids": ["text:p1"], "answers": ["paris"], "protocol": "answer_string"},
        {"id": "q2", "question": "madrid country", "dataset": "wikisql",
         "gold_ids": ["table:t1"], "answers": ["spain"], "protocol": "gold_id"},
    ])
    return tmp_path


def read_jsonl(path):
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def test_help_golden(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["--help"])
    assert exc.value.code == 0
    assert capsys.readouterr().out == (DATA_DIR / "help.txt").read_text()


def test_unknown_flag_exits_1():
    assert run_command(["search", "--bogus"]) == 1


def test_missing_file_exits_2(tmp_path):
    out = tmp_path / "out.jsonl"
    assert run_command(["ingest", "--kind", "passages", "--in", str(tmp_path / "nope"), "--out", str(out)]) == 2
    assert not out.exists()


def test_ingest_normalizes(workspace):
    out = workspace / "norm.jsonl"
    assert run_command(["ingest", "--kind", "passages", "--in", str(workspace / "passages.jsonl"),
                        "--out", str(out)]) == 0
    objs = read_jsonl(out)
    assert [o["id"] for o in objs] == ["text:p1", "text:p2", "text:p3"]


def test_no_partial_output_on_data_error(workspace):
    bad = workspace / "bad.jsonl"
    bad.write_text('{"id": "a", "title": "", "text": "ok"}\n{broken\n')
    out = workspace / "out.jsonl"
    assert run_command(["ingest", "--kind", "passages", "--in", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert not list(workspace.glob(".tmp-*"))


def test_linearize(workspace):
    out = workspace / "lin.jsonl"
    assert run_command(["linearize", "--corpus", str(workspace / "passages.jsonl"),
                        str(workspace / "tables.jsonl"), "--out", str(out)]) == 0
    objs = read_jsonl(out)
    assert objs[-1] == {"id": "table:t1", "text": "Capitals | city , country | madrid , spain"}


def test_index_sparse_deterministic(workspace):
    out1, out2 = workspace / "a.bmi", workspace / "b.bmi"
    args = ["index-sparse", "--corpus", str(workspace / "passages.jsonl"), str(workspace / "tables.jsonl")]
    assert run_command(args + ["--out", str(out1)]) == 0
    assert run_command(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_sparse_search_pipeline(workspace):
    index = workspace / "i.bmi"
    run = workspace / "run.jsonl"
    assert run_command(["index-sparse", "--corpus", str(workspace / "passages.jsonl"),
                        str(workspace / "tables.jsonl"), "--out", str(index)]) == 0
    assert run_command(["search", "--mode", "sparse", "--index", str(index),
                        "--queries", str(workspace / "queries.jsonl"), "--k", "10",
                        "--out", str(run)]) == 0
    objs = read_jsonl(run)
    assert objs[0]["query_id"] == "q1"
    assert objs[0]["hits"][0]["doc_id"] == "text:p1"
    assert objs[1]["hits"][0]["doc_id"] == "table:t1"


def test_eval_pipeline_perfect_recall(workspace, capsys):
    index = workspace / "i.bmi"
    run = workspace / "run.jsonl"
    report = workspace / "report.json"
    run_command(["index-sparse", "--corpus", str(workspace / "passages.jsonl"),
                 str(workspace / "tables.jsonl"), "--out", str(index)])
    run_command(["search", "--mode", "sparse", "--index", str(index),
                 "--queries", str(workspace / "queries.jsonl"), "--k", "10", "--out", str(run)])
    assert run_command(["eval", "--run", str(run), "--queries", str(workspace / "queries.jsonl"),
                        "--corpus", str(workspace / "passages.jsonl"), str(workspace / "tables.jsonl"),
                        "--out", str(report)]) == 0
    obj = json.loads(report.read_text())
    assert obj["overall"]["10"] == 1.0
    assert "R@10" in capsys.readouterr().out


def test_dense_pipeline(workspace):
    emb = workspace / "docs.emb"
    run = workspace / "run.jsonl"
    assert run_command(["embed-hash", "--corpus", str(workspace / "passages.jsonl"),
                        str(workspace / "tables.jsonl"), "--dim", "128", "--seed", "1",
                        "--out", str(emb)]) == 0
    assert run_command(["search", "--mode", "dense", "--embeddings", str(emb),
                        "--queries", str(workspace / "queries.jsonl"), "--k", "2",
                        "--metric", "cosine", "--seed", "1", "--out", str(run)]) == 0
    objs = read_jsonl(run)
    assert len(objs) == 2
    assert len(objs[0]["hits"]) == 2


def test_embed_hash_deterministic(workspace):
    out1, out2 = workspace / "a.emb", workspace / "b.emb"
    args = ["embed-hash", "--corpus", str(workspace / "passages.jsonl"), "--dim", "64"]
    assert run_command(args + ["--out", str(out1)]) == 0
    assert run_command(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_index_dense_alignment(workspace):
    emb = workspace / "docs.emb"
    aligned = workspace / "aligned.emb"
    run_command(["embed-hash", "--corpus", str(workspace / "passages.jsonl"), "--dim", "64",
                 "--out", str(emb)])
    assert run_command(["index-dense", "--corpus", str(workspace / "passages.jsonl"),
                        "--embeddings", str(emb), "--out", str(aligned)]) == 0
    assert run_command(["index-dense", "--corpus", str(workspace / "tables.jsonl"),
                        "--embeddings", str(emb), "--out", str(aligned)]) == 2


def test_mine_negatives_command(workspace):
    index = workspace / "i.bmi"
    out = workspace / "samples.jsonl"
    run_command(["index-sparse", "--corpus", str(workspace / "passages.jsonl"),
                 str(workspace / "tables.jsonl"), "--out", str(index)])
    assert run_command(["mine-negatives", "--queries", str(workspace / "queries.jsonl"),
                        "--index", str(index), "--corpus", str(workspace / "passages.jsonl"),
                        str(workspace / "tables.jsonl"), "--out", str(out)]) == 0
    for obj in read_jsonl(out):
        assert set(obj) == {"question", "positive_id", "hard_negative_id",
                            "positive_modality", "negative_modality"}


def test_build_mixed_command(workspace):
    out = workspace / "mixed.jsonl"
    assert run_command(["build-mixed", "--passages", str(workspace / "passages.jsonl"),
                        "--tables", str(workspace / "tables.jsonl"), "--sample-size", "2",
                        "--seed", "0", "--required-from", str(workspace / "queries.jsonl"),
                        "--out", str(out)]) == 0
    ids = [o["id"] for o in read_jsonl(out)]
    assert "text:p1" in ids and "table:t1" in ids
    assert len(ids) == 3  # 2 passages + 1 table


def test_filter_context_command(workspace):
    labels = workspace / "labels.jsonl"
    out = workspace / "kept.jsonl"
    write_jsonl(labels, [{"id": "q1", "label": "context_independent"},
                         {"id": "q2", "label": "under_specified"}])
    assert run_command(["filter-context", "--queries", str(workspace / "queries.jsonl"),
                        "--labels", str(labels), "--out", str(out)]) == 0
    assert [o["id"] for o in read_jsonl(out)] == ["q1"]


def test_overlap_report_command(workspace):
    out = workspace / "overlap.json"
    assert run_command(["overlap-report", "--queries", str(workspace / "queries.jsonl"),
                        "--corpus", str(workspace / "passages.jsonl"), str(workspace / "tables.jsonl"),
                        "--out", str(out)]) == 0
    obj = json.loads(out.read_text())
    assert sum(b["count"] for b in obj["bins"]) == 2


def test_config_precedence(workspace, monkeypatch):
    cfg = workspace / "mmr.conf"
    cfg.write_text("k1=2.0\n")
    out_default = workspace / "d.bmi"
    out_cfg = workspace / "c.bmi"
    out_env = workspace / "e.bmi"
    out_flag = workspace / "f.bmi"
    base = ["index-sparse", "--corpus", str(workspace / "passages.jsonl")]
    assert run_command(base + ["--out", str(out_default)]) == 0
    assert run_command(["--config", str(cfg)] + base + ["--out", str(out_cfg)]) == 0
    monkeypatch.setenv("TTR_K1", "3.0")
    assert run_command(["--config", str(cfg)] + base + ["--out", str(out_env)]) == 0
    assert run_command(["--config", str(cfg)] + base + ["--k1", "4.0", "--out", str(out_flag)]) == 0
    monkeypatch.delenv("TTR_K1")
    from mmretrieval.sparse import read_index
    assert read_index(out_default).params.k1 == 1.2
    assert read_index(out_cfg).params.k1 == 2.0
    assert read_index(out_env).params.k1 == 3.0
    assert read_index(out_flag).params.k1 == 4.0

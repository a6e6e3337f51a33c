import pytest

from mmretrieval.builder import (
    NoNegativeFound,
    apply_context_filter,
    build_mixed_corpus,
    mine_hard_negative,
    mine_training_samples,
)
from mmretrieval.corpus import Dataset, MatchProtocol, Passage, QueryRecord, Table
from mmretrieval.sparse import build_sparse
from conftest import make_passage, make_table, write_jsonl


def passages(n):
    return [Passage(id=f"text:p{i}", title="", body=f"passage number {i}") for i in range(n)]


def tables(n):
    return [
        Table(id=f"table:t{i}", page_title="", section_title="", caption="",
              header=("h",), rows=((f"cell{i}",),))
        for i in range(n)
    ]


def make_query(qid, question, golds=(), answers=(), protocol=MatchProtocol.ANSWER_STRING,
               dataset=Dataset.NQ):
    return QueryRecord(
        id=qid, question=question, dataset=dataset,
        gold_ids=frozenset(golds), answers=tuple(answers), protocol=protocol,
    )


def test_mixed_corpus_contract():
    docs = build_mixed_corpus(passages(10), tables(5), sample_size=4, required_ids={"text:p1"}, seed=0)
    ids = [d.id for d in docs]
    assert sum(1 for i in ids if i.startswith("text:")) == 4
    assert "text:p1" in ids
    assert sum(1 for i in ids if i.startswith("table:")) == 5


def test_mixed_corpus_full_sample():
    docs = build_mixed_corpus(passages(6), tables(2), sample_size=6, required_ids=set(), seed=3)
    assert sum(1 for d in docs if d.id.startswith("text:")) == 6


def test_mixed_corpus_deterministic():
    a = build_mixed_corpus(passages(20), tables(3), 5, {"text:p7"}, seed=42)
    b = build_mixed_corpus(passages(20), tables(3), 5, {"text:p7"}, seed=42)
    assert [d.id for d in a] == [d.id for d in b]


def test_mixed_corpus_size_invariant():
    docs = build_mixed_corpus(passages(9), tables(4), 9, set(), seed=1)
    assert len(docs) == 9 + 4


def test_mixed_corpus_missing_required_id():
    with pytest.raises(ValueError, match="text:nope"):
        build_mixed_corpus(passages(3), tables(1), 2, {"text:nope"}, seed=0)


def test_mixed_corpus_required_table_id_is_fine():
    docs = build_mixed_corpus(passages(3), tables(2), 2, {"table:t1"}, seed=0)
    assert "table:t1" in {d.id for d in docs}


def test_context_filter_identity(tmp_path):
    queries = [make_query("q1", "who", answers=["x"]), make_query("q2", "what", answers=["y"])]
    labels = tmp_path / "labels.jsonl"
    write_jsonl(labels, [{"id": "q1", "label": "context_independent"},
                         {"id": "q2", "label": "context_independent"}])
    assert apply_context_filter(queries, labels) == queries


def test_context_filter_drops_under_specified(tmp_path):
    queries = [make_query("q1", "who", answers=["x"]), make_query("q2", "what", answers=["y"])]
    labels = tmp_path / "labels.jsonl"
    write_jsonl(labels, [{"id": "q1", "label": "under_specified"},
                         {"id": "q2", "label": "under_specified"}])
    assert apply_context_filter(queries, labels) == []


def test_context_filter_missing_label_errors(tmp_path):
    queries = [make_query("q1", "who", answers=["x"])]
    labels = tmp_path / "labels.jsonl"
    write_jsonl(labels, [{"id": "other", "label": "context_independent"}])
    with pytest.raises(ValueError, match="q1"):
        apply_context_filter(queries, labels)


def test_mine_skips_answer_bearing_rank1():
    corpus = [
        make_passage("a", "", "the answer paris lives here with capital france words"),
        make_passage("b", "", "capital france words but nothing else"),
        make_passage("c", "", "unrelated text entirely"),
    ]
    index = build_sparse(corpus)
    query = make_query("q", "capital france words", golds=set(), answers=["paris"])
    # rank 1 contains the answer; rank 2 does not
    assert mine_hard_negative(query, index, corpus) == "text:b"


def test_mine_never_returns_gold():
    corpus = [
        make_passage("a", "", "madrid spain capital"),
        make_passage("b", "", "madrid spain capital extra"),
    ]
    index = build_sparse(corpus)
    query = make_query("q", "madrid spain capital", golds={"text:a"}, answers=["lisbon"])
    assert mine_hard_negative(query, index, corpus) == "text:b"


def test_mine_no_negative_found():
    corpus = [make_passage("a", "", "paris paris paris")]
    index = build_sparse(corpus)
    query = make_query("q", "paris", answers=["paris"])
    with pytest.raises(NoNegativeFound):
        mine_hard_negative(query, index, corpus)


def test_mine_cross_modal_text_negative_for_table_question():
    corpus = [
        make_table("gold", page="olympic medals", header=["year", "count"], rows=[["2004", "12"]]),
        make_table("other", page="unrelated topic", header=["x"], rows=[["y"]]),
        make_passage("textneg", "olympic medals", "olympic medals were won over many years"),
        make_passage("far", "", "completely different passage"),
    ]
    index = build_sparse(corpus)
    query = make_query(
        "q", "olympic medals year count", golds={"table:gold"}, answers=["12"],
        protocol=MatchProtocol.GOLD_ID, dataset=Dataset.WIKISQL,
    )
    negative = mine_hard_negative(query, index, corpus)
    assert negative == "text:textneg"


def test_mined_negatives_sound_over_random_corpora():
    import random

    from mmretrieval.evaluation import answer_in_text
    from mmretrieval.sparse import sparse_search

    rng = random.Random(21)
    vocab = [f"w{i}" for i in range(15)]
    for trial in range(25):
        corpus = [
            make_passage(f"{trial}_{i}", "", " ".join(rng.choice(vocab) for _ in range(6)))
            for i in range(12)
        ]
        index = build_sparse(corpus)
        answer = rng.choice(vocab)
        query = make_query("q", " ".join(rng.sample(vocab, 3)), golds={corpus[0].id}, answers=[answer])
        try:
            negative = mine_hard_negative(query, index, corpus, max_candidates=12)
        except NoNegativeFound:
            continue
        doc = next(d for d in corpus if d.id == negative)
        assert negative not in query.gold_ids
        assert not answer_in_text(doc.linearized, query.answers)
        # equals the oracle's top qualifying candidate
        for hit in sparse_search(index, query.question, 12):
            if hit.doc_id in query.gold_ids:
                continue
            hit_doc = next(d for d in corpus if d.id == hit.doc_id)
            if answer_in_text(hit_doc.linearized, query.answers):
                continue
            assert hit.doc_id == negative
            break


def test_training_samples_export_and_drop():
    corpus = [
        make_passage("pos", "", "shared tokens here plus answer lisbon"),
        make_passage("neg", "", "shared tokens here nothing more"),
    ]
    index = build_sparse(corpus)
    queries = [
        make_query("good", "shared tokens", golds={"text:pos"}, answers=["lisbon"]),
        make_query("hopeless", "zzz qqq", golds={"text:pos"}, answers=["lisbon"]),
    ]
    samples = mine_training_samples(queries, index, corpus, max_candidates=5)
    assert len(samples) == 1
    sample = samples[0]
    assert sample.positive_id == "text:pos"
    assert sample.hard_negative_id == "text:neg"
    assert sample.positive_modality == "text"
    assert sample.negative_modality == "text"

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mmretrieval.corpus import Document, Passage, Table


def make_passage(pid, title, body):
    return Document(Passage(id=f"text:{pid}", title=title, body=body))


def make_table(tid, page="", section="", caption="", header=("col",), rows=()):
    return Document(
        Table(
            id=f"table:{tid}",
            page_title=page,
            section_title=section,
            caption=caption,
            header=tuple(header),
            rows=tuple(tuple(r) for r in rows),
        )
    )


def write_jsonl(path, objs):
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@pytest.fixture
def tiny_corpus():
    return [
        make_passage("p1", "Paris", "Paris is the capital of France."),
        make_passage("p2", "Berlin", "Berlin is the capital of Germany."),
        make_table("t1", page="Capitals", header=["city", "country"], rows=[["madrid", "spain"]]),
    ]

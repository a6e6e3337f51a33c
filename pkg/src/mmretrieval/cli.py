"""Batch command-line surface. Every subcommand is deterministic given its
flags, input files and seed; structured outputs go to --out paths and are
written atomically (temp file + rename)."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import builder, corpus, dense, evaluation, sparse, textstats
from .config import load_config_file, resolve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextmanager
def atomic_out(path: str):
    """Yield a temp file handle; rename onto `path` only on success."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_jsonl(path: str, objs) -> None:
    with atomic_out(path) as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False).encode("utf-8"))
            fh.write(b"\n")


def write_json(path: str, obj) -> None:
    with atomic_out(path) as fh:
        fh.write(json.dumps(obj, ensure_ascii=False, indent=2).encode("utf-8"))
        fh.write(b"\n")


def _write_binary_atomic(path: str, write_fn) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmr", description="Joint text and table retrieval engine")
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--threads", type=int, default=None, help="cap internal parallelism")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a dataset file")
    p.add_argument("--kind", choices=["passages", "tables", "queries"], required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("linearize", help="emit the linearized text of every document")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("index-sparse", help="build a BM25 index (BMI1 file)")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--k1", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("embed-hash", help="hash-embed documents or queries to an EMB1 file")
    p.add_argument("--corpus", nargs="+", help="document JSONL files (embeds linearized text)")
    p.add_argument("--queries", help="query JSONL file (embeds questions)")
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("index-dense", help="validate embeddings against a corpus and re-emit aligned EMB1")
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("search", help="run retrieval for every query, write a run file")
    p.add_argument("--mode", choices=["sparse", "dense"], required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--index", help="BMI1 index file (sparse mode)")
    p.add_argument("--embeddings", help="document EMB1 file (dense mode)")
    p.add_argument("--query-embeddings", help="query EMB1 file; default hash-embeds questions")
    p.add_argument("--metric", choices=["dot", "cosine"], default=None)
    p.add_argument("--seed", type=int, default=None, help="hash-embedding seed (dense mode)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("mine-negatives", help="mine one BM25 hard negative per query")
    p.add_argument("--queries", required=True)
    p.add_argument("--index", required=True)
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--max-candidates", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("build-mixed", help="assemble the mixed text+table corpus")
    p.add_argument("--passages", required=True)
    p.add_argument("--tables", required=True)
    p.add_argument("--sample-size", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--required-from", help="query JSONL whose gold ids must survive sampling")
    p.add_argument("--out", required=True)

    p = sub.add_parser("filter-context", help="drop under-specified queries per a label file")
    p.add_argument("--queries", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="score a run file: recall@k per dataset")
    p.add_argument("--run", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--ks", type=int, nargs="+", default=None)
    p.add_argument("--sample-n", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("overlap-report", help="lexical overlap of queries with their gold documents")
    p.add_argument("--queries", required=True)
    p.add_argument("--corpus", nargs="+", required=True)
    p.add_argument("--edges", type=float, nargs="+", default=None)
    p.add_argument("--out", required=True)

    return parser


def load_run_file(path: str) -> dict[str, list]:
    from .hits import RetrievalHit

    runs = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            runs[obj["query_id"]] = [
                RetrievalHit(doc_id=h["doc_id"], score=float(h["score"]), rank=r)
                for r, h in enumerate(obj["hits"], start=1)
            ]
    return runs


def _run_to_obj(query_id: str, hits) -> dict:
    return {"query_id": query_id, "hits": [{"doc_id": h.doc_id, "score": h.score} for h in hits]}


def cmd_ingest(args, cfg):
    if args.kind == "passages":
        objs = [corpus.passage_to_obj(p) for p in corpus.ingest_passages(args.inp)]
    elif args.kind == "tables":
        objs = [corpus.table_to_obj(t) for t in corpus.ingest_tables(args.inp)]
    else:
        objs = [corpus.query_to_obj(q) for q in corpus.ingest_queries(args.inp)]
    write_jsonl(args.out, objs)
    print(f"ingested {len(objs)} {args.kind} -> {args.out}")


def cmd_linearize(args, cfg):
    docs = corpus.load_corpus(args.corpus)
    write_jsonl(args.out, ({"id": d.id, "text": d.linearized} for d in docs))
    print(f"linearized {len(docs)} documents -> {args.out}")


def cmd_index_sparse(args, cfg):
    docs = corpus.load_corpus(args.corpus)
    params = sparse.Bm25Params(
        k1=resolve("k1", args.k1, cfg, 1.2, float),
        b=resolve("b", args.b, cfg, 0.75, float),
    )
    index = sparse.build_sparse(docs, params)
    _write_binary_atomic(args.out, index.save)
    print(f"indexed {index.N} documents (k1={params.k1}, b={params.b}) -> {args.out}")


def cmd_embed_hash(args, cfg):
    dim = resolve("dim", args.dim, cfg, 256, int)
    seed = resolve("seed", args.seed, cfg, 0, int)
    if bool(args.corpus) == bool(args.queries):
        raise ValueError("embed-hash needs exactly one of --corpus or --queries")
    if args.corpus:
        docs = corpus.load_corpus(args.corpus)
        matrix = dense.embed_texts((d.linearized for d in docs), (d.id for d in docs), dim, seed)
    else:
        queries = corpus.ingest_queries(args.queries)
        matrix = dense.embed_texts((q.question for q in queries), (q.id for q in queries), dim, seed)
    _write_binary_atomic(args.out, lambda p: dense.write_embeddings(matrix, p))
    print(f"embedded {len(matrix.ids)} items at dim {dim} -> {args.out}")


def cmd_index_dense(args, cfg):
    docs = corpus.load_corpus(args.corpus)
    matrix = dense.read_embeddings(args.embeddings)
    row_of = {row_id: i for i, row_id in enumerate(matrix.ids)}
    missing = [d.id for d in docs if d.id not in row_of]
    if missing:
        raise ValueError(f"embeddings missing {len(missing)} corpus ids (first: {missing[0]!r})")
    rows = np.stack([matrix.vectors[row_of[d.id]] for d in docs])
    aligned = dense.EmbeddingMatrix(ids=tuple(d.id for d in docs), vectors=rows)
    _write_binary_atomic(args.out, lambda p: dense.write_embeddings(aligned, p))
    print(f"aligned {len(aligned.ids)} embeddings to corpus order -> {args.out}")


def cmd_search(args, cfg):
    queries = corpus.ingest_queries(args.queries)
    k = resolve("k", args.k, cfg, 10, int)
    results = []
    if args.mode == "sparse":
        if not args.index:
            raise ValueError("sparse search requires --index")
        index = sparse.read_index(args.index)
        for q in queries:
            results.append(_run_to_obj(q.id, sparse.sparse_search(index, q.question, k)))
    else:
        if not args.embeddings:
            raise ValueError("dense search requires --embeddings")
        docs_matrix = dense.read_embeddings(args.embeddings)
        metric = dense.SimilarityMetric(resolve("metric", args.metric, cfg, "dot"))
        seed = resolve("seed", args.seed, cfg, 0, int)
        query_rows = None
        if args.query_embeddings:
            qm = dense.read_embeddings(args.query_embeddings)
            if qm.dim != docs_matrix.dim:
                raise ValueError(f"query dim {qm.dim} != document dim {docs_matrix.dim}")
            query_rows = {row_id: qm.vectors[i] for i, row_id in enumerate(qm.ids)}
        for q in queries:
            if query_rows is not None:
                if q.id not in query_rows:
                    raise ValueError(f"query {q.id!r} missing from --query-embeddings")
                vec = query_rows[q.id]
            else:
                vec = dense.hash_embed(q.question, docs_matrix.dim, seed)
            results.append(_run_to_obj(q.id, dense.dense_search(docs_matrix, vec, k, metric)))
    write_jsonl(args.out, results)
    print(f"searched {len(queries)} queries (mode={args.mode}, k={k}) -> {args.out}")


def cmd_mine_negatives(args, cfg):
    queries = corpus.ingest_queries(args.queries)
    index = sparse.read_index(args.index)
    docs = corpus.load_corpus(args.corpus)
    max_candidates = resolve("max-candidates", args.max_candidates, cfg, builder.DEFAULT_MAX_CANDIDATES, int)
    samples = builder.mine_training_samples(queries, index, docs, max_candidates)
    write_jsonl(args.out, (s.to_json_obj() for s in samples))
    print(f"mined {len(samples)} training samples ({len(queries) - len(samples)} queries dropped) -> {args.out}")


def cmd_build_mixed(args, cfg):
    passages = corpus.ingest_passages(args.passages)
    tables = corpus.ingest_tables(args.tables)
    required: set[str] = set()
    if args.required_from:
        for q in corpus.ingest_queries(args.required_from):
            required |= q.gold_ids
    seed = resolve("seed", args.seed, cfg, 0, int)
    docs = builder.build_mixed_corpus(passages, tables, args.sample_size, required, seed)
    write_jsonl(args.out, (corpus.document_to_obj(d) for d in docs))
    print(f"mixed corpus of {len(docs)} documents -> {args.out}")


def cmd_filter_context(args, cfg):
    queries = corpus.ingest_queries(args.queries)
    kept = builder.apply_context_filter(queries, args.labels)
    write_jsonl(args.out, (corpus.query_to_obj(q) for q in kept))
    print(f"kept {len(kept)} of {len(queries)} queries -> {args.out}")


def cmd_eval(args, cfg):
    queries = corpus.ingest_queries(args.queries)
    docs = corpus.load_corpus(args.corpus)
    docs_by_id = {d.id: d for d in docs}
    runs = load_run_file(args.run)
    ks = tuple(args.ks) if args.ks else evaluation.DEFAULT_KS
    sample_n = resolve("sample-n", args.sample_n, cfg, None, int)
    seed = resolve("seed", args.seed, cfg, 0, int)
    if sample_n is not None and sample_n < len(queries):
        queries = evaluation.sample_queries(queries, sample_n, seed)
    table = evaluation.recall_at_k(runs, queries, docs_by_id, ks)
    write_json(args.out, table.to_json_obj())
    print(table.render())


def cmd_overlap_report(args, cfg):
    queries = corpus.ingest_queries(args.queries)
    docs = corpus.load_corpus(args.corpus)
    docs_by_id = {d.id: d for d in docs}
    edges = tuple(args.edges) if args.edges else textstats.DEFAULT_EDGES
    overlaps = [(q.id, evaluation.query_overlap(q, docs_by_id)) for q in queries]
    report = textstats.bucketize(overlaps, edges)
    write_json(args.out, report.to_json_obj())
    print(f"overlap report for {len(overlaps)} queries -> {args.out}")


_COMMANDS = {
    "ingest": cmd_ingest,
    "linearize": cmd_linearize,
    "index-sparse": cmd_index_sparse,
    "embed-hash": cmd_embed_hash,
    "index-dense": cmd_index_dense,
    "search": cmd_search,
    "mine-negatives": cmd_mine_negatives,
    "build-mixed": cmd_build_mixed,
    "filter-context": cmd_filter_context,
    "eval": cmd_eval,
    "overlap-report": cmd_overlap_report,
}


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    config_path = args.config or os.environ.get("TTR_CONFIG")
    try:
        cfg = load_config_file(config_path)
        _COMMANDS[args.command](args, cfg)
    except (ValueError, LookupError, OSError) as exc:
        print(f"mmr: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()

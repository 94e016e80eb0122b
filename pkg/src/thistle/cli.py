"""Command-line entry point: load a corpus into a snapshot, query a snapshot,
run the benchmark matrix, or inspect a snapshot header.

Every flag is validated before any file is touched. Errors print one
machine-parsable line to stderr (``thistle: error: <Type>: <message>``) and
exit nonzero; the exit status is zero iff no error line was emitted. The
THISTLE_SEED environment variable overrides the built-in default of --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

from .core import ALL_BACKENDS, Backend, IndexConfig, build_index, default_configs
from .errors import ConfigError, SidecarError, ThistleError
from .evalharness import (
    EvalPair,
    clustered_workload,
    plot_reports,
    read_pairs,
    render_table,
    run_matrix,
    write_reports,
)
from .hnsw import HnswParams
from .lsh import LshParams
from .storage import ingest, load_snapshot, save_snapshot
from .vecmath import Embedding


def _default_seed() -> int:
    env = os.environ.get("THISTLE_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"THISTLE_SEED must be an integer, got {env!r}") from None
    return 42


def _config_from_args(args: argparse.Namespace, dim: int) -> IndexConfig:
    backend = Backend.from_tag(args.backend)
    hnsw = None
    lsh = None
    if backend in (Backend.HNSW_COSINE, Backend.HNSW_EUCLIDEAN):
        hnsw = HnswParams(
            M=args.M,
            ef_construction=args.ef_construction,
            ef_search=args.ef_search,
            seed=args.seed,
        )
    elif backend is Backend.LSH:
        lsh = LshParams(
            n_projections=args.projections,
            n_tables=args.tables,
            seed=args.seed,
        )
    return IndexConfig(
        backend=backend,
        dim=dim,
        normalize_on_insert=args.normalize,
        hnsw=hnsw,
        lsh=lsh,
    ).validated()


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend",
        default=Backend.ITER_COSINE.tag,
        choices=[b.tag for b in ALL_BACKENDS],
        help="search backend (default: %(default)s)",
    )
    parser.add_argument("--dim", type=int, default=None,
                        help="embedding dimension (default: inferred from corpus)")
    parser.add_argument("--M", type=int, default=16, help="HNSW neighbors per layer")
    parser.add_argument("--ef-construction", type=int, default=200,
                        help="HNSW build beam width")
    parser.add_argument("--ef-search", type=int, default=100,
                        help="HNSW query beam width")
    parser.add_argument("--projections", type=int, default=16,
                        help="LSH hyperplanes per table")
    parser.add_argument("--tables", type=int, default=8, help="LSH table count")
    parser.add_argument("--normalize", action="store_true",
                        help="L2-normalize vectors on insert (and queries to match)")


def _add_seed_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: THISTLE_SEED env var or 42)")


def _add_sidecar_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--embedder", choices=["file", "sidecar"], default="file",
                        help="where embeddings come from (default: vectors in file)")
    parser.add_argument("--sidecar-cmd", default=None,
                        help="command that embeds a corpus file (input/output paths appended)")


def _run_sidecar(cmd: str, input_path: Path, output_path: Path) -> None:
    argv = shlex.split(cmd) + [str(input_path), str(output_path)]
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as exc:
        raise SidecarError(f"failed to run sidecar {argv[0]!r}: {exc}") from None
    if proc.returncode != 0:
        detail = proc.stderr.strip().splitlines()
        tail = detail[-1] if detail else "no stderr"
        raise SidecarError(f"sidecar exited with status {proc.returncode}: {tail}")
    if not output_path.exists():
        raise SidecarError("sidecar reported success but wrote no output file")


def _embed_text(text: str, args: argparse.Namespace) -> Embedding:
    if args.embedder != "sidecar":
        raise ConfigError(
            "text queries need an embedder: pass --embedder sidecar --sidecar-cmd '...'"
        )
    if not args.sidecar_cmd:
        raise ConfigError("--embedder sidecar requires --sidecar-cmd")
    with tempfile.TemporaryDirectory(prefix="thistle-sidecar-") as tmp:
        inp = Path(tmp) / "query.jsonl"
        out = Path(tmp) / "query.vec.jsonl"
        inp.write_text(json.dumps({"id": "query", "text": text}) + "\n", encoding="utf-8")
        _run_sidecar(args.sidecar_cmd, inp, out)
        records = ingest(out)
    if not records:
        raise SidecarError("sidecar produced an empty corpus for the query text")
    return records[0].embedding


def _parse_vector(text: str) -> Embedding:
    text = text.strip()
    try:
        if text.startswith("["):
            return Embedding(json.loads(text))
        return Embedding([float(tok) for tok in text.replace(",", " ").split()])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"could not parse query vector: {exc}") from None


def cmd_load(args: argparse.Namespace) -> int:
    records = ingest(args.corpus, expected_dim=args.dim)
    if not records:
        raise ConfigError(f"corpus {args.corpus} holds no records")
    config = _config_from_args(args, dim=records[0].embedding.dim)
    index = build_index(config)
    report = index.load(records)
    save_snapshot(index, args.index)
    print(f"loaded {report.count} records in {report.elapsed_s:.3f}s -> {args.index}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    index = load_snapshot(args.index)
    if args.vector is not None:
        query = _parse_vector(args.vector)
    elif args.vector_file is not None:
        query = _parse_vector(Path(args.vector_file).read_text(encoding="utf-8"))
    elif args.text is not None:
        query = _embed_text(args.text, args)
    else:
        raise ConfigError("provide a query via --vector, --vector-file or --text")
    result = index.query(query, args.k)
    for rid, dist in result.hits:
        text = index.text_of(rid)
        line = f"{rid}\t{dist:.9g}"
        if text:
            line += f"\t{text}"
        print(line)
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    sizes = [int(tok) for tok in str(args.sizes).split(",") if tok.strip()]
    if args.backends == "all":
        tags = [b.tag for b in ALL_BACKENDS]
    else:
        tags = [tok.strip() for tok in args.backends.split(",") if tok.strip()]
    backends = [Backend.from_tag(tag) for tag in tags]
    if args.corpus is not None:
        corpus_path = Path(args.corpus)
        pairs_path = Path(args.pairs) if args.pairs else None
        if args.embedder == "sidecar":
            if not args.sidecar_cmd:
                raise ConfigError("--embedder sidecar requires --sidecar-cmd")
            with tempfile.TemporaryDirectory(prefix="thistle-bench-") as tmp:
                embedded = Path(tmp) / "corpus.vec.jsonl"
                _run_sidecar(args.sidecar_cmd, corpus_path, embedded)
                records = ingest(embedded)
        else:
            records = ingest(corpus_path)
        if pairs_path is not None:
            pairs = read_pairs(pairs_path)
            no_vec = [p for p in pairs if p.query_embedding is None]
            if no_vec and args.embedder != "sidecar":
                raise ConfigError(
                    f"{len(no_vec)} pairs have text but no vector; "
                    "use --embedder sidecar --sidecar-cmd '...'"
                )
            if no_vec:
                pairs = _embed_pairs(pairs, args)
        else:
            pairs = [
                EvalPair(
                    query_id=f"q::{rec.id}",
                    expected_result_id=rec.id,
                    query_embedding=rec.embedding,
                )
                for rec in records
            ]
    else:
        records, pairs = clustered_workload(
            n=max(sizes), dim=args.synthetic_dim, seed=args.seed
        )
    configs = [
        c
        for c in default_configs(dim=records[0].embedding.dim, seed=args.seed)
        if c.backend in backends
    ]
    reports = run_matrix(records, pairs, sizes=sizes, configs=configs, k=args.k,
                         seed=args.seed)
    print(render_table(reports))
    write_reports(reports, args.report)
    print(f"wrote {len(reports)} reports -> {args.report}")
    if args.plots:
        for path in plot_reports(reports, args.plots):
            print(f"wrote plot -> {path}")
    return 0


def _embed_pairs(pairs: list[EvalPair], args: argparse.Namespace) -> list[EvalPair]:
    """Embed text-only pairs through the sidecar in one batch."""
    with tempfile.TemporaryDirectory(prefix="thistle-pairs-") as tmp:
        inp = Path(tmp) / "pairs.jsonl"
        out = Path(tmp) / "pairs.vec.jsonl"
        with open(inp, "w", encoding="utf-8") as fh:
            for i, pair in enumerate(pairs):
                if pair.query_embedding is None:
                    fh.write(json.dumps({"id": str(i), "text": pair.query_text or ""}) + "\n")
        _run_sidecar(args.sidecar_cmd, inp, out)
        embedded = {rec.id: rec.embedding for rec in ingest(out)}
    fixed = []
    for i, pair in enumerate(pairs):
        if pair.query_embedding is None:
            emb = embedded.get(str(i))
            if emb is None:
                raise SidecarError(f"sidecar returned no vector for pair {pair.query_id!r}")
            pair = EvalPair(pair.query_id, pair.expected_result_id, emb, pair.query_text)
        fixed.append(pair)
    return fixed


def cmd_info(args: argparse.Namespace) -> int:
    index = load_snapshot(args.index)
    config = index.config
    print(f"backend: {config.backend.tag}")
    print(f"dim: {config.dim}")
    print(f"records: {len(index)}")
    print(f"normalize_on_insert: {config.normalize_on_insert}")
    print(f"seed: {config.seed}")
    for key, value in sorted(config.params_dict().items()):
        if key in ("dim", "normalize_on_insert", "seed"):
            continue
        print(f"{key}: {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thistle",
        description="Vector store with exact and approximate top-k search.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_load = sub.add_parser("load", help="ingest a corpus and write a snapshot")
    p_load.add_argument("corpus", help="corpus file (JSON Lines with id/text/vector)")
    p_load.add_argument("--index", required=True, help="snapshot path to write")
    _add_backend_flags(p_load)
    _add_seed_flag(p_load)
    p_load.set_defaults(func=cmd_load)

    p_query = sub.add_parser("query", help="query a snapshot")
    p_query.add_argument("--index", required=True, help="snapshot path to read")
    p_query.add_argument("--vector", help="inline query vector, comma-separated or JSON")
    p_query.add_argument("--vector-file", help="file holding one query vector")
    p_query.add_argument("--text", help="query text (requires --embedder sidecar)")
    p_query.add_argument("--k", type=int, default=1, help="results to return")
    _add_sidecar_flags(p_query)
    p_query.set_defaults(func=cmd_query)

    p_bench = sub.add_parser("bench", help="run the insert-then-query benchmark matrix")
    p_bench.add_argument("--corpus", default=None,
                         help="corpus file (default: bundled synthetic workload)")
    p_bench.add_argument("--pairs", default=None,
                         help="pairs file (default: self-retrieval pairs from the corpus)")
    p_bench.add_argument("--sizes", default="100,1000,10000",
                         help="comma-separated corpus sizes (default: %(default)s)")
    p_bench.add_argument("--backends", default="all",
                         help="comma-separated backend tags or 'all'")
    p_bench.add_argument("--k", type=int, default=1, help="results per query")
    p_bench.add_argument("--report", default="thistle-report.jsonl",
                         help="machine-readable report path (default: %(default)s)")
    p_bench.add_argument("--plots", default=None,
                         help="directory for accuracy/time charts (omit to skip plots)")
    p_bench.add_argument("--synthetic-dim", type=int, default=32,
                         help="dimension of the synthetic workload")
    _add_seed_flag(p_bench)
    _add_sidecar_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_info = sub.add_parser("info", help="print a snapshot's header")
    p_info.add_argument("--index", required=True, help="snapshot path to read")
    p_info.set_defaults(func=cmd_info)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", None) is None and hasattr(args, "seed"):
            args.seed = _default_seed()
        return args.func(args)
    except ThistleError as exc:
        print(f"thistle: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"thistle: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

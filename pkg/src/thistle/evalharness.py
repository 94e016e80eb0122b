"""Insert-then-query evaluation: build a fresh index, time the load, time the
query loop, and score each (query, expected-result) pair as correct when the
expected id comes back at rank 1. Total time is insert time plus query time.

The standard protocol runs every backend at corpus sizes 100 / 1,000 / 10,000
(a 5 x 3 matrix) over one query pair per stored record. Query loops are
single-threaded so per-backend timings stay comparable.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    Backend,
    DocRecord,
    IndexConfig,
    build_index,
    default_configs,
)
from .errors import ConfigError
from .vecmath import Embedding


@dataclass(frozen=True)
class EvalPair:
    """One evaluation case: a query and the id it is expected to retrieve."""

    query_id: str
    expected_result_id: str
    query_embedding: Embedding | None = None
    query_text: str | None = None


@dataclass
class EvalReport:
    """Outcome of one (backend, N) cell."""

    backend: str
    n: int
    n_pairs: int
    k: int
    accuracy: float
    hit_rate_at_k: float
    insert_time_s: float
    query_time_s: float
    total_time_s: float
    params: dict
    seed: int
    recall_vs_exact: float | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))


def run_eval(
    records: Sequence[DocRecord],
    pairs: Sequence[EvalPair],
    config: IndexConfig,
    k: int = 1,
) -> EvalReport:
    """Build a fresh index from ``records`` and evaluate ``pairs`` against it."""
    report, _ = _run_eval_detailed(records, pairs, config, k)
    return report


def _run_eval_detailed(
    records: Sequence[DocRecord],
    pairs: Sequence[EvalPair],
    config: IndexConfig,
    k: int,
) -> tuple[EvalReport, list[str | None]]:
    config = config.validated()
    ids = {rec.id for rec in records}
    missing = sorted({p.expected_result_id for p in pairs} - ids)
    if missing:
        raise ConfigError(
            f"expected result ids not present in corpus: {', '.join(missing[:5])}"
            + (" ..." if len(missing) > 5 else "")
        )
    for pair in pairs:
        if pair.query_embedding is None:
            raise ConfigError(
                f"pair {pair.query_id!r} has no query embedding; "
                "embed query texts before evaluation"
            )
    index = build_index(config)
    insert_report = index.load(list(records))
    correct = 0
    hits_at_k = 0
    top1: list[str | None] = []
    t0 = time.perf_counter()
    for pair in pairs:
        result = index.query(pair.query_embedding, k)
        first = result.hits[0][0] if result.hits else None
        top1.append(first)
        if first == pair.expected_result_id:
            correct += 1
        if pair.expected_result_id in result.ids:
            hits_at_k += 1
    query_time = time.perf_counter() - t0
    n_pairs = len(pairs)
    report = EvalReport(
        backend=config.backend.tag,
        n=len(records),
        n_pairs=n_pairs,
        k=k,
        accuracy=correct / n_pairs if n_pairs else 0.0,
        hit_rate_at_k=hits_at_k / n_pairs if n_pairs else 0.0,
        insert_time_s=insert_report.elapsed_s,
        query_time_s=query_time,
        total_time_s=insert_report.elapsed_s + query_time,
        params=config.params_dict(),
        seed=config.seed,
    )
    return report, top1


_EXACT_TWIN = {
    Backend.HNSW_COSINE.tag: Backend.ITER_COSINE.tag,
    Backend.HNSW_EUCLIDEAN.tag: Backend.ITER_EUCLIDEAN.tag,
    Backend.LSH.tag: Backend.ITER_COSINE.tag,
}


def run_matrix(
    records: Sequence[DocRecord],
    pairs: Sequence[EvalPair],
    sizes: Sequence[int] = (100, 1000, 10000),
    configs: Sequence[IndexConfig] | None = None,
    k: int = 1,
    seed: int = 42,
) -> list[EvalReport]:
    """One report per (size, backend) cell.

    For each size N the first N records form the corpus and only pairs whose
    expected id falls inside it are evaluated. Approximate backends get
    ``recall_vs_exact`` filled in: how often their rank-1 id agreed with the
    exact backend of the same metric.
    """
    records = list(records)
    sizes = sorted(set(int(s) for s in sizes))
    if not sizes or sizes[0] < 1:
        raise ConfigError("sizes must be positive integers")
    if len(records) < sizes[-1]:
        raise ConfigError(
            f"corpus holds {len(records)} records, need {sizes[-1]} for the largest size"
        )
    if configs is None:
        configs = default_configs(dim=records[0].embedding.dim, seed=seed)
    tags = [c.backend.tag for c in configs]
    if len(set(tags)) != len(tags):
        raise ConfigError("configs must not repeat a backend within one matrix run")
    reports: list[EvalReport] = []
    for n in sizes:
        subset = records[:n]
        subset_ids = {rec.id for rec in subset}
        sub_pairs = [p for p in pairs if p.expected_result_id in subset_ids]
        cell: dict[str, tuple[EvalReport, list[str | None]]] = {}
        for config in configs:
            report, top1 = _run_eval_detailed(subset, sub_pairs, config, k)
            cell[report.backend] = (report, top1)
        for tag, (report, top1) in cell.items():
            twin = _EXACT_TWIN.get(tag)
            if twin in cell:
                exact_top1 = cell[twin][1]
                agree = sum(a == b for a, b in zip(top1, exact_top1))
                report.recall_vs_exact = agree / len(top1) if top1 else 0.0
        reports.extend(report for report, _ in cell.values())
    return reports


def render_table(reports: Sequence[EvalReport]) -> str:
    """Fixed-width comparison table, one row per report."""
    headers = [
        "backend", "N", "pairs", "acc@1", "hit@k", "vs_exact",
        "insert_s", "query_s", "total_s",
    ]
    rows = []
    for rep in reports:
        rows.append(
            [
                rep.backend,
                str(rep.n),
                str(rep.n_pairs),
                f"{rep.accuracy:.4f}",
                f"{rep.hit_rate_at_k:.4f}",
                "-" if rep.recall_vs_exact is None else f"{rep.recall_vs_exact:.4f}",
                f"{rep.insert_time_s:.4f}",
                f"{rep.query_time_s:.4f}",
                f"{rep.total_time_s:.4f}",
            ]
        )
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(headers)]
    def fmt(cells: list[str]) -> str:
        return "  ".join(c.rjust(w) for c, w in zip(cells, widths))
    lines = [fmt(headers), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def write_reports(reports: Sequence[EvalReport], path: str | Path) -> None:
    """Machine-readable report file: one JSON object per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for rep in reports:
            fh.write(rep.to_json() + "\n")


def read_pairs(path: str | Path) -> list[EvalPair]:
    """Parse a pairs file (JSON Lines: query_id, expected_id, vector or text)."""
    pairs: list[EvalPair] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"pairs line {lineno}: invalid record: {exc}") from None
            qid = obj.get("query_id") or f"q{lineno}"
            expected = obj.get("expected_id")
            if not isinstance(expected, str) or not expected:
                raise ConfigError(f"pairs line {lineno}: missing 'expected_id'")
            vector = obj.get("vector")
            text = obj.get("text")
            emb = None
            if vector is not None:
                try:
                    emb = Embedding(vector)
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"pairs line {lineno}: bad vector: {exc}") from None
            pairs.append(
                EvalPair(
                    query_id=str(qid),
                    expected_result_id=expected,
                    query_embedding=emb,
                    query_text=text,
                )
            )
    return pairs


def plot_reports(reports: Sequence[EvalReport], out_dir: str | Path) -> list[Path]:
    """Write accuracy-vs-N and total-time-vs-N charts as PNGs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_backend: dict[str, list[EvalReport]] = {}
    for rep in reports:
        by_backend.setdefault(rep.backend, []).append(rep)
    paths = []
    for metric, ylabel, fname, logy in (
        ("accuracy", "accuracy@1", "accuracy_vs_n.png", False),
        ("total_time_s", "total time (s)", "time_vs_n.png", True),
    ):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for backend, reps in sorted(by_backend.items()):
            reps = sorted(reps, key=lambda r: r.n)
            ax.plot([r.n for r in reps], [getattr(r, metric) for r in reps],
                    marker="o", label=backend)
        ax.set_xscale("log")
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel("corpus size N")
        ax.set_ylabel(ylabel)
        ax.legend()
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = out_dir / fname
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths


def clustered_workload(
    n: int,
    dim: int = 32,
    n_clusters: int = 40,
    spread: float = 0.35,
    seed: int = 42,
) -> tuple[list[DocRecord], list[EvalPair]]:
    """Synthetic noisy-duplicate workload: records scatter around shared
    cluster centers, and each query asks for one stored record by its own
    embedding. Growing N packs more near-duplicates into every cluster, which
    is what stresses the approximate backends."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((n_clusters, dim))
    noise = spread * rng.standard_normal((n, dim))
    rows = centers[np.arange(n) % n_clusters] + noise
    records = []
    pairs = []
    for i in range(n):
        rid = f"doc-{i:05d}"
        emb = Embedding(rows[i])
        records.append(DocRecord(id=rid, text=f"synthetic passage {i}", embedding=emb))
        pairs.append(
            EvalPair(query_id=f"q-{i:05d}", expected_result_id=rid, query_embedding=emb)
        )
    return records, pairs

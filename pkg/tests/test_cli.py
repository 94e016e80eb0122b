"""Command-line behavior: snapshots, queries, bench runs, error reporting."""

import json
import subprocess
import sys

import pytest

from thistle import write_corpus
from thistle.cli import main

from conftest import random_records


@pytest.fixture
def corpus(tmp_path):
    path = tmp_path / "corpus.jsonl"
    write_corpus(random_records(12, 4, seed=120), path)
    return path


def _load(corpus, snap, *extra):
    return main(["load", str(corpus), "--index", str(snap), *extra])


class TestLoad:
    def test_load_writes_snapshot_and_reports_count(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        assert _load(corpus, snap) == 0
        out = capsys.readouterr().out
        assert "loaded 12 records" in out
        assert snap.exists()

    def test_info_reports_backend_params_verbatim(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        assert _load(corpus, snap, "--backend", "hnsw-cosine", "--M", "12",
                     "--ef-construction", "33", "--ef-search", "44") == 0
        capsys.readouterr()
        assert main(["info", "--index", str(snap)]) == 0
        out = capsys.readouterr().out
        assert "backend: hnsw-cosine" in out
        assert "records: 12" in out
        assert "M: 12" in out
        assert "ef_construction: 33" in out
        assert "ef_search: 44" in out

    def test_wrong_dim_fails_without_leaving_snapshot(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        assert _load(corpus, snap, "--dim", "9") == 1
        err = capsys.readouterr().err
        assert err.startswith("thistle: error:")
        assert not snap.exists()

    def test_missing_corpus_file_reports_error(self, tmp_path, capsys):
        assert main(["load", str(tmp_path / "nope.jsonl"), "--index",
                     str(tmp_path / "s.bin")]) == 1
        assert "thistle: error:" in capsys.readouterr().err

    def test_seed_env_var_overrides_default(self, corpus, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("THISTLE_SEED", "777")
        snap = tmp_path / "snap.bin"
        assert _load(corpus, snap, "--backend", "lsh") == 0
        capsys.readouterr()
        main(["info", "--index", str(snap)])
        assert "seed: 777" in capsys.readouterr().out

    def test_explicit_seed_beats_env_var(self, corpus, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("THISTLE_SEED", "777")
        snap = tmp_path / "snap.bin"
        assert _load(corpus, snap, "--backend", "lsh", "--seed", "5") == 0
        capsys.readouterr()
        main(["info", "--index", str(snap)])
        assert "seed: 5" in capsys.readouterr().out


class TestQuery:
    def test_query_stored_vector_returns_itself(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        _load(corpus, snap)
        capsys.readouterr()
        records = random_records(12, 4, seed=120)
        vec = ",".join(str(float(x)) for x in records[3].embedding.values)
        assert main(["query", "--index", str(snap), "--vector", vec, "--k", "1"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1
        rid, dist = out[0].split("\t")[:2]
        assert rid == records[3].id
        assert float(dist) == pytest.approx(0.0, abs=1e-9)

    def test_k_exceeding_corpus_prints_all_rows(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        _load(corpus, snap)
        capsys.readouterr()
        assert main(["query", "--index", str(snap), "--vector", "1,0,0,0",
                     "--k", "50"]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 12

    def test_vector_file_input(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        _load(corpus, snap)
        capsys.readouterr()
        qfile = tmp_path / "q.txt"
        qfile.write_text("[1, 0, 0, 0]", encoding="utf-8")
        assert main(["query", "--index", str(snap), "--vector-file", str(qfile)]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 1

    def test_text_query_without_sidecar_is_explicit_error(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        _load(corpus, snap)
        capsys.readouterr()
        assert main(["query", "--index", str(snap), "--text", "hello"]) == 1
        err = capsys.readouterr().err
        assert "sidecar" in err and err.startswith("thistle: error:")

    def test_query_deterministic_output(self, corpus, tmp_path, capsys):
        snap = tmp_path / "snap.bin"
        _load(corpus, snap, "--backend", "hnsw-euclidean")
        capsys.readouterr()
        outs = []
        for _ in range(2):
            assert main(["query", "--index", str(snap), "--vector", "0.1,0.2,0.3,0.4",
                         "--k", "5"]) == 0
            outs.append(capsys.readouterr().out)
        assert outs[0] == outs[1]


class TestBench:
    def test_synthetic_smoke_writes_reports(self, tmp_path, capsys):
        report = tmp_path / "report.jsonl"
        assert main(["bench", "--sizes", "10", "--backends", "all",
                     "--report", str(report), "--seed", "1"]) == 0
        out = capsys.readouterr().out
        assert "backend" in out  # table rendered
        rows = [json.loads(line) for line in report.read_text().splitlines()]
        assert len(rows) == 5

    def test_two_backends_with_recall_column(self, tmp_path, capsys):
        report = tmp_path / "report.jsonl"
        assert main(["bench", "--sizes", "60", "--backends", "iter-cosine,hnsw-cosine",
                     "--report", str(report), "--seed", "2"]) == 0
        capsys.readouterr()
        rows = [json.loads(line) for line in report.read_text().splitlines()]
        assert len(rows) == 2
        hnsw_row = next(r for r in rows if r["backend"] == "hnsw-cosine")
        assert hnsw_row["recall_vs_exact"] is not None

    def test_corpus_backed_bench(self, tmp_path, capsys):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus(random_records(30, 4, seed=121), corpus)
        report = tmp_path / "report.jsonl"
        assert main(["bench", "--corpus", str(corpus), "--sizes", "30",
                     "--backends", "iter-euclidean", "--report", str(report)]) == 0
        rows = [json.loads(line) for line in report.read_text().splitlines()]
        assert rows[0]["n"] == 30 and rows[0]["accuracy"] == 1.0

    def test_plot_emission_behind_flag(self, tmp_path, capsys):
        report = tmp_path / "report.jsonl"
        plots = tmp_path / "plots"
        assert main(["bench", "--sizes", "10,20", "--backends", "iter-cosine,lsh",
                     "--report", str(report), "--plots", str(plots), "--seed", "3"]) == 0
        assert (plots / "accuracy_vs_n.png").exists()
        assert (plots / "time_vs_n.png").exists()

    def test_unknown_backend_rejected(self, tmp_path, capsys):
        assert main(["bench", "--sizes", "10", "--backends", "warp-drive",
                     "--report", str(tmp_path / "r.jsonl")]) == 1
        assert "thistle: error:" in capsys.readouterr().err

    def test_total_equals_sum_in_report_file(self, tmp_path, capsys):
        report = tmp_path / "report.jsonl"
        assert main(["bench", "--sizes", "15", "--backends", "all",
                     "--report", str(report), "--seed", "4"]) == 0
        for row in (json.loads(line) for line in report.read_text().splitlines()):
            assert row["total_time_s"] == row["insert_time_s"] + row["query_time_s"]


class TestConsoleEntryPoint:
    def test_module_invocation(self, corpus, tmp_path):
        snap = tmp_path / "snap.bin"
        proc = subprocess.run(
            [sys.executable, "-m", "thistle", "load", str(corpus),
             "--index", str(snap)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        assert "loaded 12 records" in proc.stdout

    def test_error_goes_to_stderr_with_nonzero_exit(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "thistle", "info", "--index",
             str(tmp_path / "missing.bin")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 1
        assert proc.stderr.startswith("thistle: error:")

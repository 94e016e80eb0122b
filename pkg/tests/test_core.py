"""Shared interface contracts: load/query validation, result ordering,
config checking, and cross-backend invariants."""

import math

import numpy as np
import pytest

from thistle import (
    ALL_BACKENDS,
    Backend,
    ConfigError,
    DimensionMismatchError,
    DocRecord,
    DuplicateIdError,
    Embedding,
    EmptyIndexError,
    HnswParams,
    IndexConfig,
    LshParams,
    ZeroVectorError,
    build_index,
    default_configs,
)
from thistle.core import rank_hits

from conftest import random_records


def _records(vectors: dict[str, list[float]]):
    return [DocRecord(rid, "", Embedding(vec)) for rid, vec in vectors.items()]


class TestLoad:
    def test_load_counts_records(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        report = idx.load(_records({"a": [1, 0], "b": [0, 1], "c": [1, 1]}))
        assert report.count == 3
        assert report.elapsed_s >= 0.0
        assert len(idx) == 3

    def test_load_empty_batch_is_noop(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        report = idx.load([])
        assert report.count == 0
        assert len(idx) == 0

    def test_duplicate_id_in_batch_rejected_atomically(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        idx.load(_records({"a": [1, 0]}))
        bad = _records({"b": [0, 1]}) + _records({"b": [1, 1]})
        with pytest.raises(DuplicateIdError, match="'b'"):
            idx.load(bad)
        assert len(idx) == 1  # nothing from the failed batch landed

    def test_duplicate_against_existing_rejected(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        idx.load(_records({"a": [1, 0]}))
        with pytest.raises(DuplicateIdError, match="'a'"):
            idx.load(_records({"a": [0, 1]}))

    def test_dim_mismatch_names_record_index(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        recs = _records({"a": [1, 0]}) + [DocRecord("b", "", Embedding([1, 2, 3]))]
        with pytest.raises(DimensionMismatchError, match="record 1"):
            idx.load(recs)
        assert len(idx) == 0

    def test_zero_vector_rejected_for_cosine(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        with pytest.raises(ZeroVectorError, match="'z'"):
            idx.load([DocRecord("z", "", Embedding([0.0, 0.0]))])

    def test_zero_vector_allowed_for_euclidean(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        idx.load([DocRecord("z", "", Embedding([0.0, 0.0]))])
        assert idx.query(Embedding([0.0, 0.0]), 1).ids == ("z",)


class TestQuery:
    def test_cosine_two_hit_example(self):
        # hand-computed: distance of c from the query is 1 - 0.9/sqrt(0.82)
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        idx.load(_records({"a": [1, 0], "b": [0, 1], "c": [0.9, 0.1]}))
        result = idx.query(Embedding([1, 0]), 2)
        assert result.ids == ("a", "c")
        assert result.distances[0] == pytest.approx(0.0, abs=1e-12)
        expected_c = 1.0 - 0.9 / math.sqrt(0.82)
        assert result.distances[1] == pytest.approx(expected_c, abs=1e-6)

    @pytest.mark.parametrize("backend", ALL_BACKENDS)
    def test_sole_record_self_query(self, backend):
        config = default_configs(dim=4, seed=3)[list(ALL_BACKENDS).index(backend)]
        idx = build_index(config)
        idx.load(_records({"only": [0.3, -1.2, 0.5, 2.0]}))
        result = idx.query(Embedding([0.3, -1.2, 0.5, 2.0]), 1)
        assert result.ids == ("only",)
        assert result.distances[0] == pytest.approx(0.0, abs=1e-9)

    def test_k_larger_than_corpus_returns_all_sorted(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        idx.load(_records({"a": [1, 0], "b": [0, 1], "c": [2, 2]}))
        result = idx.query(Embedding([0, 0]), 10)
        assert len(result) == 3
        assert list(result.distances) == sorted(result.distances)

    def test_empty_index_rejected(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        with pytest.raises(EmptyIndexError):
            idx.query(Embedding([1, 0]), 1)

    def test_query_dim_mismatch(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        idx.load(_records({"a": [1, 0]}))
        with pytest.raises(DimensionMismatchError):
            idx.query(Embedding([1, 0, 0]), 1)

    def test_bad_k_rejected(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        idx.load(_records({"a": [1, 0]}))
        with pytest.raises(ValueError):
            idx.query(Embedding([1, 0]), 0)

    def test_zero_query_rejected_for_cosine(self):
        idx = build_index(IndexConfig(Backend.ITER_COSINE, dim=2))
        idx.load(_records({"a": [1, 0]}))
        with pytest.raises(ZeroVectorError):
            idx.query(Embedding([0.0, 0.0]), 1)

    def test_accepts_plain_sequences(self):
        idx = build_index(IndexConfig(Backend.ITER_EUCLIDEAN, dim=2))
        idx.load(_records({"a": [1, 0]}))
        assert idx.query([1.0, 0.0], 1).ids == ("a",)


class TestResultInvariants:
    def test_rank_hits_orders_and_truncates(self):
        result = rank_hits([("b", 1.0), ("a", 1.0), ("c", 0.5)], 2)
        assert result.hits == (("c", 0.5), ("a", 1.0))

    @pytest.mark.parametrize("config", default_configs(dim=6, seed=9))
    def test_result_ordering_invariant(self, config):
        records = random_records(80, 6, seed=21)
        idx = build_index(config)
        idx.load(records)
        rng = np.random.default_rng(33)
        for _ in range(20):
            result = idx.query(Embedding(rng.standard_normal(6)), 10)
            keys = [(d, i) for i, d in result.hits]
            assert keys == sorted(keys)
            assert len(set(result.ids)) == len(result.ids)
            assert len(result) <= 10

    @pytest.mark.parametrize("config", default_configs(dim=6, seed=9))
    def test_self_query_rank_one(self, config):
        records = random_records(60, 6, seed=22)
        idx = build_index(config)
        idx.load(records)
        for rec in records[::7]:
            result = idx.query(rec.embedding, 1)
            assert result.ids == (rec.id,)

    @pytest.mark.parametrize("config", default_configs(dim=5, seed=10))
    def test_load_then_query_deterministic(self, config):
        records = random_records(70, 5, seed=23)
        queries = [Embedding(v) for v in np.random.default_rng(24).standard_normal((10, 5))]
        runs = []
        for _ in range(2):
            idx = build_index(config)
            idx.load(records)
            runs.append([idx.query(q, 5).hits for q in queries])
        assert runs[0] == runs[1]


class TestIndexConfig:
    def test_foreign_params_rejected(self):
        with pytest.raises(ConfigError):
            IndexConfig(Backend.ITER_COSINE, dim=4, hnsw=HnswParams()).validated()
        with pytest.raises(ConfigError):
            IndexConfig(Backend.HNSW_COSINE, dim=4, lsh=LshParams()).validated()

    def test_defaults_filled_for_backend(self):
        config = IndexConfig(Backend.HNSW_COSINE, dim=4).validated()
        assert config.hnsw is not None and config.hnsw.M == 16
        config = IndexConfig(Backend.LSH, dim=4).validated()
        assert config.lsh is not None and config.lsh.n_tables == 8

    def test_bad_dim_rejected(self):
        with pytest.raises(ConfigError):
            IndexConfig(Backend.ITER_COSINE, dim=0).validated()

    def test_bad_hnsw_params_rejected(self):
        with pytest.raises(ConfigError):
            IndexConfig(
                Backend.HNSW_COSINE, dim=4, hnsw=HnswParams(M=8, ef_construction=4)
            ).validated()

    def test_unknown_backend_tag(self):
        with pytest.raises(ConfigError):
            Backend.from_tag("fancy-index")


class TestNormalizeOnInsert:
    def test_normalized_euclidean_matches_unit_vectors(self):
        idx = build_index(
            IndexConfig(Backend.ITER_EUCLIDEAN, dim=2, normalize_on_insert=True)
        )
        idx.load(_records({"a": [3, 4], "b": [0, 2]}))
        # after normalization a=(0.6, 0.8), b=(0, 1); query normalized too
        result = idx.query(Embedding([0, 5]), 2)
        assert result.ids == ("b", "a")
        assert result.distances[0] == pytest.approx(0.0, abs=1e-7)
        expected = math.sqrt(0.6**2 + 0.2**2)
        assert result.distances[1] == pytest.approx(expected, abs=1e-6)

    def test_zero_vector_rejected_when_normalizing(self):
        idx = build_index(
            IndexConfig(Backend.ITER_EUCLIDEAN, dim=2, normalize_on_insert=True)
        )
        with pytest.raises(ZeroVectorError):
            idx.load([DocRecord("z", "", Embedding([0.0, 0.0]))])

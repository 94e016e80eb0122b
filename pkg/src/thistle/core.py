"""Common record/result types and the interface every index backend implements.

A database instance is one index: records go in through ``load`` and come
back out of ``query`` as (id, distance) hits sorted ascending by distance
with ties broken by ascending id. Loading is single-writer; once a load has
completed any number of threads may query concurrently (queries never mutate
index state).
"""

from __future__ import annotations

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyIndexError,
    ZeroVectorError,
)
from .vecmath import DEFAULT_DIM, Embedding

if TYPE_CHECKING:
    from .hnsw import HnswParams
    from .lsh import LshParams


class Backend(Enum):
    """The five selectable search configurations."""

    ITER_COSINE = "iter-cosine"
    ITER_EUCLIDEAN = "iter-euclidean"
    HNSW_COSINE = "hnsw-cosine"
    HNSW_EUCLIDEAN = "hnsw-euclidean"
    LSH = "lsh"

    @property
    def tag(self) -> str:
        return self.value

    @property
    def metric(self) -> str:
        """LSH re-ranks candidates by cosine, so it counts as a cosine backend."""
        if self in (Backend.ITER_EUCLIDEAN, Backend.HNSW_EUCLIDEAN):
            return "euclidean"
        return "cosine"

    @classmethod
    def from_tag(cls, tag: str) -> "Backend":
        for member in cls:
            if member.value == tag:
                return member
        known = ", ".join(m.value for m in cls)
        raise ConfigError(f"unknown backend {tag!r} (expected one of: {known})")


ALL_BACKENDS: tuple[Backend, ...] = tuple(Backend)


@dataclass(frozen=True)
class DocRecord:
    """One ingested document: opaque unique id, original text, embedding."""

    id: str
    text: str
    embedding: Embedding

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise ValueError("record id must be a non-empty string")


@dataclass(frozen=True)
class QueryResult:
    """Ranked hits: (id, distance) ascending by distance, ties by ascending id."""

    hits: tuple[tuple[str, float], ...]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(h[0] for h in self.hits)

    @property
    def distances(self) -> tuple[float, ...]:
        return tuple(h[1] for h in self.hits)

    def __len__(self) -> int:
        return len(self.hits)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.hits)


def rank_hits(candidates: Iterable[tuple[str, float]], k: int) -> QueryResult:
    """Sort candidates by (distance, id) and keep the first k."""
    ordered = sorted(candidates, key=lambda h: (h[1], h[0]))
    return QueryResult(hits=tuple(ordered[:k]))


@dataclass(frozen=True)
class InsertReport:
    count: int
    elapsed_s: float


@dataclass(frozen=True)
class QueryStats:
    """Work accounting for one query: exact distance evaluations performed."""

    distance_evals: int


@dataclass
class IndexConfig:
    """Backend selection plus its hyperparameters, validated before any insert."""

    backend: Backend
    dim: int = DEFAULT_DIM
    normalize_on_insert: bool = False
    hnsw: "HnswParams | None" = None
    lsh: "LshParams | None" = None

    def validated(self) -> "IndexConfig":
        """Fill in backend defaults and reject params meant for another backend."""
        from .hnsw import HnswParams
        from .lsh import LshParams

        if not isinstance(self.backend, Backend):
            raise ConfigError(f"backend must be a Backend, got {self.backend!r}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ConfigError(f"dim must be a positive integer, got {self.dim!r}")
        is_hnsw = self.backend in (Backend.HNSW_COSINE, Backend.HNSW_EUCLIDEAN)
        is_lsh = self.backend is Backend.LSH
        if self.hnsw is not None and not is_hnsw:
            raise ConfigError(f"hnsw params are not valid for backend {self.backend.tag}")
        if self.lsh is not None and not is_lsh:
            raise ConfigError(f"lsh params are not valid for backend {self.backend.tag}")
        hnsw = self.hnsw
        lsh = self.lsh
        if is_hnsw:
            hnsw = hnsw if hnsw is not None else HnswParams()
            hnsw.validate()
        if is_lsh:
            lsh = lsh if lsh is not None else LshParams()
            lsh.validate()
        return IndexConfig(
            backend=self.backend,
            dim=self.dim,
            normalize_on_insert=bool(self.normalize_on_insert),
            hnsw=hnsw,
            lsh=lsh,
        )

    def params_dict(self) -> dict:
        """Hyperparameters as a plain dict (for reports and snapshots)."""
        out: dict = {
            "dim": self.dim,
            "normalize_on_insert": self.normalize_on_insert,
        }
        if self.hnsw is not None:
            out.update(
                M=self.hnsw.M,
                ef_construction=self.hnsw.ef_construction,
                ef_search=self.hnsw.ef_search,
                level_norm=self.hnsw.level_norm,
                seed=self.hnsw.seed,
            )
        if self.lsh is not None:
            out.update(
                n_projections=self.lsh.n_projections,
                n_tables=self.lsh.n_tables,
                seed=self.lsh.seed,
            )
        return out

    @property
    def seed(self) -> int:
        if self.hnsw is not None:
            return self.hnsw.seed
        if self.lsh is not None:
            return self.lsh.seed
        return 0


class VectorIndex(ABC):
    """Load/query interface shared by every backend.

    Subclasses implement ``_insert_batch`` and ``_search``; batch validation,
    ordering of hits and all-or-nothing semantics live here so they cannot
    drift between backends.
    """

    def __init__(self, config: IndexConfig) -> None:
        self.config = config.validated()
        self._texts: dict[str, str] = {}

    # -- writing ---------------------------------------------------------

    def load(self, records: Sequence[DocRecord]) -> InsertReport:
        """Insert a batch of records; all-or-nothing on any validation failure."""
        t0 = time.perf_counter()
        records = list(records)
        prepared: list[tuple[str, np.ndarray]] = []
        seen: set[str] = set()
        cosine = self.config.backend.metric == "cosine"
        for i, rec in enumerate(records):
            if rec.id in seen:
                raise DuplicateIdError(f"duplicate id within batch: {rec.id!r}")
            if rec.id in self._texts:
                raise DuplicateIdError(f"id already present in index: {rec.id!r}")
            seen.add(rec.id)
            if rec.embedding.dim != self.config.dim:
                raise DimensionMismatchError(
                    f"record {i} (id={rec.id!r}) has dim {rec.embedding.dim}, "
                    f"index expects {self.config.dim}"
                )
            emb = rec.embedding
            if self.config.normalize_on_insert:
                try:
                    emb = emb.normalized()
                except ZeroVectorError:
                    raise ZeroVectorError(
                        f"record {i} (id={rec.id!r}) is all-zero and cannot be normalized"
                    ) from None
            elif cosine:
                v64 = emb.values.astype(np.float64)
                if float(np.sqrt((v64 * v64).sum())) == 0.0:
                    raise ZeroVectorError(
                        f"record {i} (id={rec.id!r}) is all-zero; cosine distance undefined"
                    )
            prepared.append((rec.id, emb.values))
        self._insert_batch(prepared)
        for rec in records:
            self._texts[rec.id] = rec.text
        return InsertReport(count=len(records), elapsed_s=time.perf_counter() - t0)

    # -- reading ---------------------------------------------------------

    def query(self, q: Embedding | Sequence[float], k: int) -> QueryResult:
        """Return the k best hits for q (fewer if the index holds fewer records)."""
        return self.search_with_stats(q, k)[0]

    def search_with_stats(
        self, q: Embedding | Sequence[float], k: int
    ) -> tuple[QueryResult, QueryStats]:
        qv = self._validate_query(q, k)
        hits, stats = self._search(qv, k)
        return rank_hits(hits, k), stats

    def _validate_query(self, q: Embedding | Sequence[float], k: int) -> np.ndarray:
        if len(self) == 0:
            raise EmptyIndexError("cannot query an empty index")
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise ValueError(f"k must be a positive integer, got {k!r}")
        emb = q if isinstance(q, Embedding) else Embedding(q)
        if emb.dim != self.config.dim:
            raise DimensionMismatchError(
                f"query has dim {emb.dim}, index expects {self.config.dim}"
            )
        if self.config.normalize_on_insert:
            emb = emb.normalized()
        elif self.config.backend.metric == "cosine":
            v64 = emb.values.astype(np.float64)
            if float(np.sqrt((v64 * v64).sum())) == 0.0:
                raise ZeroVectorError("query is all-zero; cosine distance undefined")
        return emb.values

    def text_of(self, record_id: str) -> str:
        return self._texts[record_id]

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._texts

    # -- backend contract --------------------------------------------------

    @abstractmethod
    def __len__(self) -> int: ...

    @abstractmethod
    def _insert_batch(self, items: list[tuple[str, np.ndarray]]) -> None:
        """Insert pre-validated (id, float32 vector) pairs."""

    @abstractmethod
    def _search(self, q: np.ndarray, k: int) -> tuple[list[tuple[str, float]], QueryStats]:
        """Return candidate (id, true distance) pairs; caller ranks and truncates."""

    @abstractmethod
    def _iter_entries(self) -> Iterator[tuple[str, np.ndarray]]:
        """Yield (id, float32 vector) in insertion order (used by snapshots)."""


def build_index(config: IndexConfig) -> VectorIndex:
    """Instantiate the backend selected by ``config``."""
    from .bruteforce import FlatIndex
    from .hnsw import HnswIndex
    from .lsh import LshIndex

    config = config.validated()
    if config.backend in (Backend.ITER_COSINE, Backend.ITER_EUCLIDEAN):
        return FlatIndex(config)
    if config.backend in (Backend.HNSW_COSINE, Backend.HNSW_EUCLIDEAN):
        return HnswIndex(config)
    return LshIndex(config)


def default_configs(dim: int, seed: int = 42, normalize: bool = False) -> list[IndexConfig]:
    """One config per backend with default hyperparameters (benchmark matrix)."""
    from .hnsw import HnswParams
    from .lsh import LshParams

    return [
        IndexConfig(Backend.ITER_COSINE, dim=dim, normalize_on_insert=normalize),
        IndexConfig(Backend.ITER_EUCLIDEAN, dim=dim, normalize_on_insert=normalize),
        IndexConfig(
            Backend.HNSW_COSINE,
            dim=dim,
            normalize_on_insert=normalize,
            hnsw=HnswParams(seed=seed),
        ),
        IndexConfig(
            Backend.HNSW_EUCLIDEAN,
            dim=dim,
            normalize_on_insert=normalize,
            hnsw=HnswParams(seed=seed),
        ),
        IndexConfig(
            Backend.LSH, dim=dim, normalize_on_insert=normalize, lsh=LshParams(seed=seed)
        ),
    ]

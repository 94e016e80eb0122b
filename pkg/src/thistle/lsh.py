"""Random-hyperplane locality-sensitive hashing with multiple tables.

Each table hashes a vector to the sign pattern of its dot products with
n_projections random unit hyperplanes; vectors at a small angle collide with
probability (1 - angle/pi) per hyperplane. Queries take the union of the
matching bucket across tables and re-rank those candidates by exact cosine
distance, so reported distances are always true distances. An empty union is
a miss, not an error.

Single-writer build; concurrent readers after build.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import IndexConfig, QueryStats, VectorIndex
from .errors import ConfigError, DimensionMismatchError
from .vecmath import Embedding, cosine_to_rows, row_norms, stack64


@dataclass(frozen=True)
class LshParams:
    """Hyperplanes per table (signature bits) and number of independent tables."""

    n_projections: int = 16
    n_tables: int = 8
    seed: int = 42

    def validate(self) -> None:
        if (
            not isinstance(self.n_projections, int)
            or not 1 <= self.n_projections <= 64
        ):
            raise ConfigError(
                f"n_projections must be an integer in [1, 64], got {self.n_projections!r}"
            )
        if not isinstance(self.n_tables, int) or self.n_tables < 1:
            raise ConfigError(
                f"n_tables must be a positive integer, got {self.n_tables!r}"
            )


def draw_planes(
    dim: int, n_projections: int, n_tables: int, seed: int
) -> list[np.ndarray]:
    """Per-table (n_projections, dim) matrices of unit hyperplane normals.

    Tables are drawn sequentially from one seeded stream, so the first T
    tables are identical for any n_tables >= T: growing the table count only
    ever adds candidates.
    """
    rng = np.random.default_rng(seed)
    planes = []
    for _ in range(n_tables):
        mat = rng.standard_normal((n_projections, dim))
        mat /= np.sqrt((mat * mat).sum(axis=1, keepdims=True))
        planes.append(mat)
    return planes


def signature_bits(planes: np.ndarray, v64: np.ndarray) -> int:
    """Sign pattern of v against one table's hyperplanes, packed LSB-first.

    Bit i is 1 iff v . plane_i >= 0; the pattern is invariant under positive
    scaling of v.
    """
    bits = (planes @ v64) >= 0.0
    powers = (np.uint64(1) << np.arange(bits.shape[0], dtype=np.uint64))
    return int(bits.astype(np.uint64) @ powers)


class LshIndex(VectorIndex):
    """VectorIndex backend over sign-random-projection hash tables."""

    def __init__(self, config: IndexConfig) -> None:
        super().__init__(config)
        assert self.config.lsh is not None  # validated() fills defaults
        self.params: LshParams = self.config.lsh
        self._planes = draw_planes(
            self.config.dim,
            self.params.n_projections,
            self.params.n_tables,
            self.params.seed,
        )
        self._powers = np.uint64(1) << np.arange(
            self.params.n_projections, dtype=np.uint64
        )
        self.buckets: list[dict[int, list[int]]] = [
            {} for _ in range(self.params.n_tables)
        ]
        self._ids: list[str] = []
        self._vecs: list[np.ndarray] = []
        self._rows64 = np.empty((0, config.dim), dtype=np.float64)
        self._norms64 = np.empty(0, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._ids)

    def signature(self, table: int, v: Embedding | np.ndarray) -> int:
        values = v.values if isinstance(v, Embedding) else np.asarray(v, np.float32)
        if values.shape[0] != self.config.dim:
            raise DimensionMismatchError(
                f"vector has dim {values.shape[0]}, index expects {self.config.dim}"
            )
        return signature_bits(self._planes[table], values.astype(np.float64))

    def _insert_batch(self, items: list[tuple[str, np.ndarray]]) -> None:
        if not items:
            return
        start = len(self._ids)
        self._ids.extend(rid for rid, _ in items)
        self._vecs.extend(vec for _, vec in items)
        self._rows64 = stack64(self._vecs)
        self._norms64 = row_norms(self._rows64)
        new_rows = self._rows64[start:]
        for table, planes in enumerate(self._planes):
            bits = (new_rows @ planes.T) >= 0.0
            sigs = bits.astype(np.uint64) @ self._powers
            table_buckets = self.buckets[table]
            for offset, sig in enumerate(sigs.tolist()):
                table_buckets.setdefault(int(sig), []).append(start + offset)

    def _candidate_handles(self, q64: np.ndarray) -> list[int]:
        found: dict[int, None] = {}
        for table, planes in enumerate(self._planes):
            sig = signature_bits(planes, q64)
            for handle in self.buckets[table].get(sig, ()):
                found[handle] = None
        return list(found)

    def candidate_ids(self, q: Embedding | np.ndarray) -> list[str]:
        """Union of the query's bucket across tables (before re-ranking)."""
        values = q.values if isinstance(q, Embedding) else np.asarray(q, np.float32)
        if values.shape[0] != self.config.dim:
            raise DimensionMismatchError(
                f"vector has dim {values.shape[0]}, index expects {self.config.dim}"
            )
        handles = self._candidate_handles(values.astype(np.float64))
        return sorted(self._ids[h] for h in handles)

    def _search(self, q: np.ndarray, k: int) -> tuple[list[tuple[str, float]], QueryStats]:
        q64 = q.astype(np.float64)
        handles = self._candidate_handles(q64)
        if not handles:
            return [], QueryStats(distance_evals=0)
        rows = self._rows64[handles]
        q_norm = float(np.sqrt((q64 * q64).sum()))
        dists = cosine_to_rows(rows, self._norms64[handles], q64, q_norm)
        hits = [(self._ids[h], float(d)) for h, d in zip(handles, dists.tolist())]
        return hits, QueryStats(distance_evals=len(handles))

    def _iter_entries(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(zip(self._ids, self._vecs))

    @classmethod
    def _restore(
        cls,
        config: IndexConfig,
        ids: list[str],
        vecs: list[np.ndarray],
        planes: list[np.ndarray],
        buckets: list[dict[int, list[int]]],
    ) -> "LshIndex":
        idx = cls(config)
        idx._planes = planes
        idx.buckets = buckets
        idx._ids = list(ids)
        idx._vecs = list(vecs)
        idx._rows64 = stack64(idx._vecs)
        idx._norms64 = row_norms(idx._rows64)
        return idx

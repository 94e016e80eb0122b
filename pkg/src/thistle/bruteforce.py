"""Exact top-k retrieval by full scan: the baseline and the oracle for the
approximate backends. Every stored vector is scored on every query; no
pruning, no early exit, so measured query cost is the honest O(N) figure."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from .core import IndexConfig, QueryStats, VectorIndex
from .vecmath import cosine_to_rows, euclidean_to_rows, row_norms, stack64


class FlatIndex(VectorIndex):
    """Flat store scanned in full; entries keep insertion order."""

    def __init__(self, config: IndexConfig) -> None:
        super().__init__(config)
        self._ids: list[str] = []
        self._vecs: list[np.ndarray] = []
        self._rows64 = np.empty((0, config.dim), dtype=np.float64)
        self._norms64 = np.empty(0, dtype=np.float64)

    def __len__(self) -> int:
        return len(self._ids)

    def _insert_batch(self, items: list[tuple[str, np.ndarray]]) -> None:
        if not items:
            return
        self._ids.extend(rid for rid, _ in items)
        self._vecs.extend(vec for _, vec in items)
        self._rows64 = stack64(self._vecs)
        self._norms64 = row_norms(self._rows64)

    def _search(self, q: np.ndarray, k: int) -> tuple[list[tuple[str, float]], QueryStats]:
        q64 = q.astype(np.float64)
        if self.config.backend.metric == "euclidean":
            dists = euclidean_to_rows(self._rows64, q64)
        else:
            q_norm = float(np.sqrt((q64 * q64).sum()))
            dists = cosine_to_rows(self._rows64, self._norms64, q64, q_norm)
        n = len(self._ids)
        if k >= n:
            chosen = range(n)
        else:
            # Bounded selection instead of a full sort: O(N) partition, then
            # widen to every entry tied with the k-th distance so the id
            # tie-break cannot depend on partition order.
            part = np.argpartition(dists, k - 1)
            kth = dists[part[k - 1]]
            chosen = np.nonzero(dists <= kth)[0]
        top = sorted(chosen, key=lambda i: (dists[i], self._ids[i]))[: min(k, n)]
        hits = [(self._ids[i], float(dists[i])) for i in top]
        return hits, QueryStats(distance_evals=n)

    def _iter_entries(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(zip(self._ids, self._vecs))

    @classmethod
    def _restore(
        cls, config: IndexConfig, ids: list[str], vecs: list[np.ndarray]
    ) -> "FlatIndex":
        idx = cls(config)
        idx._insert_batch(list(zip(ids, vecs)))
        return idx

"""Hierarchical navigable-small-world graph for approximate top-k retrieval.

Records live in a stack of proximity-graph layers over nested node subsets:
every node sits on layer 0, exponentially fewer reach each layer above. A
query greedily descends from the entry node through the sparse upper layers,
then runs a best-first beam of width ``ef_search`` on layer 0. Edges are
undirected; per-node degree is capped at M per layer (2M on layer 0).

Build is single-writer. After construction queries are read-only and safe to
run from any number of threads.
"""

from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .core import IndexConfig, QueryStats, VectorIndex
from .errors import ConfigError
from .vecmath import cosine_to_rows, euclidean_to_rows


@dataclass(frozen=True)
class HnswParams:
    """Graph hyperparameters.

    level_norm is the multiplier in the level sampler
    floor(-ln(u) * level_norm); None selects 1/ln(M), which makes each layer
    hold roughly 1/M of the layer below.
    """

    M: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    level_norm: float | None = None
    seed: int = 42

    def validate(self) -> None:
        if not isinstance(self.M, int) or self.M < 1:
            raise ConfigError(f"M must be a positive integer, got {self.M!r}")
        if not isinstance(self.ef_construction, int) or self.ef_construction < self.M:
            raise ConfigError(
                f"ef_construction must be an integer >= M ({self.M}), "
                f"got {self.ef_construction!r}"
            )
        if not isinstance(self.ef_search, int) or self.ef_search < 1:
            raise ConfigError(
                f"ef_search must be a positive integer, got {self.ef_search!r}"
            )
        if self.level_norm is not None and not (
            isinstance(self.level_norm, (int, float)) and self.level_norm >= 0
        ):
            raise ConfigError(f"level_norm must be >= 0, got {self.level_norm!r}")

    @property
    def effective_level_norm(self) -> float:
        if self.level_norm is not None:
            return float(self.level_norm)
        return 1.0 / math.log(self.M) if self.M >= 2 else 0.0


def sample_level(level_norm: float, rng: random.Random) -> int:
    """Draw a node's top layer: floor(-ln(u) * level_norm), u uniform in (0, 1]."""
    u = 1.0 - rng.random()
    return int(math.floor(-math.log(u) * level_norm))


class LayeredGraph:
    """Adjacency and vector storage for the layered proximity graph.

    Nodes are dense integer handles in insertion order. ``layers[l]`` maps
    each node whose top layer is >= l to its (undirected) neighbor set.
    ``entry`` is the first node to reach the current maximum top layer.
    """

    def __init__(self, dim: int, metric: str) -> None:
        self.dim = dim
        self.metric = metric
        self.levels: list[int] = []
        self.layers: list[dict[int, set[int]]] = []
        self.entry: int | None = None
        self._rows64 = np.empty((0, dim), dtype=np.float64)
        self._norms64 = np.empty(0, dtype=np.float64)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def max_layer(self) -> int:
        return len(self.layers) - 1

    def add_node(self, vec32: np.ndarray, level: int) -> int:
        handle = self._count
        if handle >= self._rows64.shape[0]:
            new_cap = max(16, 2 * self._rows64.shape[0])
            rows = np.zeros((new_cap, self.dim), dtype=np.float64)
            rows[:handle] = self._rows64[:handle]
            self._rows64 = rows
            norms = np.zeros(new_cap, dtype=np.float64)
            norms[:handle] = self._norms64[:handle]
            self._norms64 = norms
        row = vec32.astype(np.float64)
        self._rows64[handle] = row
        self._norms64[handle] = float(np.sqrt((row * row).sum()))
        self.levels.append(level)
        while len(self.layers) <= level:
            self.layers.append({})
        for layer in range(level + 1):
            self.layers[layer][handle] = set()
        if self.entry is None or level > self.levels[self.entry]:
            self.entry = handle
        self._count += 1
        return handle

    def neighbors(self, layer: int, handle: int) -> set[int]:
        return self.layers[layer][handle]

    def add_edge(self, layer: int, a: int, b: int) -> None:
        self.layers[layer][a].add(b)
        self.layers[layer][b].add(a)

    def remove_edge(self, layer: int, a: int, b: int) -> None:
        self.layers[layer][a].discard(b)
        self.layers[layer][b].discard(a)

    def vector64(self, handle: int) -> np.ndarray:
        return self._rows64[handle]

    def norm64(self, handle: int) -> float:
        return float(self._norms64[handle])

    def distances(
        self,
        q64: np.ndarray,
        q_norm: float,
        handles: list[int],
        memo: dict[int, float],
    ) -> list[float]:
        """Distances from q to each handle, memoized per query/insert."""
        missing = [h for h in handles if h not in memo]
        if missing:
            rows = self._rows64[missing]
            if self.metric == "euclidean":
                dists = euclidean_to_rows(rows, q64)
            else:
                dists = cosine_to_rows(rows, self._norms64[missing], q64, q_norm)
            memo.update(zip(missing, dists.tolist()))
        return [memo[h] for h in handles]


def greedy_descend(
    g: LayeredGraph,
    q64: np.ndarray,
    q_norm: float,
    start: int,
    layer: int,
    memo: dict[int, float],
) -> tuple[int, float]:
    """Walk to the closest neighbor repeatedly until no neighbor improves.

    Returns a node none of whose same-layer neighbors is strictly closer to
    the query. Each move strictly decreases the distance, so the walk always
    terminates.
    """
    cur = start
    cur_dist = g.distances(q64, q_norm, [start], memo)[0]
    while True:
        nbrs = sorted(g.neighbors(layer, cur))
        if not nbrs:
            return cur, cur_dist
        dists = g.distances(q64, q_norm, nbrs, memo)
        best_dist, best = min(zip(dists, nbrs))
        if best_dist < cur_dist:
            cur, cur_dist = best, best_dist
        else:
            return cur, cur_dist


def search_layer(
    g: LayeredGraph,
    q64: np.ndarray,
    q_norm: float,
    entries: int | Iterable[int],
    ef: int,
    layer: int,
    memo: dict[int, float],
) -> list[tuple[float, int]]:
    """Best-first beam on one layer; returns up to ef (distance, handle) pairs
    sorted ascending. Expansion stops once the nearest unexpanded candidate is
    farther than the worst retained result."""
    if isinstance(entries, int):
        entries = [entries]
    seeds = list(dict.fromkeys(entries))
    seed_dists = g.distances(q64, q_norm, seeds, memo)
    candidates = list(zip(seed_dists, seeds))
    heapq.heapify(candidates)
    best = [(-d, h) for d, h in zip(seed_dists, seeds)]
    heapq.heapify(best)
    while len(best) > ef:
        heapq.heappop(best)
    visited = set(seeds)
    while candidates:
        dist_c, c = heapq.heappop(candidates)
        if len(best) >= ef and dist_c > -best[0][0]:
            break
        fresh = [h for h in sorted(g.neighbors(layer, c)) if h not in visited]
        if not fresh:
            continue
        visited.update(fresh)
        for dist_n, h in zip(g.distances(q64, q_norm, fresh, memo), fresh):
            if len(best) < ef:
                heapq.heappush(candidates, (dist_n, h))
                heapq.heappush(best, (-dist_n, h))
            elif dist_n < -best[0][0]:
                heapq.heappush(candidates, (dist_n, h))
                heapq.heapreplace(best, (-dist_n, h))
    return sorted((-nd, h) for nd, h in best)


class HnswIndex(VectorIndex):
    """VectorIndex backend over a LayeredGraph."""

    def __init__(self, config: IndexConfig) -> None:
        super().__init__(config)
        assert self.config.hnsw is not None  # validated() fills defaults
        self.params: HnswParams = self.config.hnsw
        self.graph = LayeredGraph(self.config.dim, self.config.backend.metric)
        self._ids: list[str] = []
        self._rng = random.Random(self.params.seed)
        self._level_draws = 0

    def __len__(self) -> int:
        return len(self._ids)

    # -- construction ------------------------------------------------------

    def _degree_cap(self, layer: int) -> int:
        return 2 * self.params.M if layer == 0 else self.params.M

    def _insert_batch(self, items: list[tuple[str, np.ndarray]]) -> None:
        for rid, vec in items:
            self._insert_one(rid, vec)

    def _insert_one(self, rid: str, vec32: np.ndarray) -> None:
        g = self.graph
        level = sample_level(self.params.effective_level_norm, self._rng)
        self._level_draws += 1
        if len(g) == 0:
            g.add_node(vec32, level)
            self._ids.append(rid)
            return
        q64 = vec32.astype(np.float64)
        q_norm = float(np.sqrt((q64 * q64).sum()))
        memo: dict[int, float] = {}
        prev_max = g.max_layer
        ep = g.entry
        assert ep is not None
        for layer in range(prev_max, level, -1):
            ep, _ = greedy_descend(g, q64, q_norm, ep, layer, memo)
        selections: list[tuple[int, list[tuple[float, int]]]] = []
        entries: list[int] = [ep]
        for layer in range(min(level, prev_max), -1, -1):
            found = search_layer(
                g, q64, q_norm, entries, self.params.ef_construction, layer, memo
            )
            selections.append((layer, found[: self.params.M]))
            entries = [h for _, h in found]
        handle = g.add_node(vec32, level)
        self._ids.append(rid)
        for layer, chosen in selections:
            for _, nbr in chosen:
                g.add_edge(layer, handle, nbr)
            for _, nbr in chosen:
                if len(g.neighbors(layer, nbr)) > self._degree_cap(layer):
                    self._prune(nbr, layer)

    def _prune(self, handle: int, layer: int) -> None:
        """Trim an overfull neighbor set back to its cap, keeping the nearest."""
        g = self.graph
        cap = self._degree_cap(layer)
        nbrs = sorted(g.neighbors(layer, handle))
        dists = g.distances(g.vector64(handle), g.norm64(handle), nbrs, {})
        ranked = sorted(zip(dists, nbrs))
        for _, dropped in ranked[cap:]:
            g.remove_edge(layer, handle, dropped)

    # -- queries -----------------------------------------------------------

    def search_with_stats(self, q, k, *, ef_search: int | None = None):
        qv = self._validate_query(q, k)
        hits, stats = self._search(qv, k, ef_search=ef_search)
        from .core import rank_hits

        return rank_hits(hits, k), stats

    def _search(
        self, q: np.ndarray, k: int, ef_search: int | None = None
    ) -> tuple[list[tuple[str, float]], QueryStats]:
        g = self.graph
        ef = max(self.params.ef_search if ef_search is None else ef_search, k)
        q64 = q.astype(np.float64)
        q_norm = float(np.sqrt((q64 * q64).sum()))
        memo: dict[int, float] = {}
        ep = g.entry
        assert ep is not None
        for layer in range(g.max_layer, 0, -1):
            ep, _ = greedy_descend(g, q64, q_norm, ep, layer, memo)
        found = search_layer(g, q64, q_norm, ep, ef, 0, memo)
        hits = [(self._ids[h], d) for d, h in found]
        return hits, QueryStats(distance_evals=len(memo))

    # -- introspection (tests, snapshots) -----------------------------------

    def node_level(self, record_id: str) -> int:
        return self.graph.levels[self._ids.index(record_id)]

    @property
    def entry_id(self) -> str | None:
        return None if self.graph.entry is None else self._ids[self.graph.entry]

    def adjacency_view(self, layer: int) -> dict[str, set[str]]:
        """String-id copy of one layer's adjacency."""
        view: dict[str, set[str]] = {}
        for handle, nbrs in self.graph.layers[layer].items():
            view[self._ids[handle]] = {self._ids[n] for n in nbrs}
        return view

    def _iter_entries(self) -> Iterator[tuple[str, np.ndarray]]:
        for handle, rid in enumerate(self._ids):
            yield rid, self.graph._rows64[handle].astype(np.float32)

    @classmethod
    def _restore(
        cls,
        config: IndexConfig,
        ids: list[str],
        vecs: list[np.ndarray],
        levels: list[int],
        layers: list[dict[int, set[int]]],
        entry: int | None,
        level_draws: int,
    ) -> "HnswIndex":
        idx = cls(config)
        g = idx.graph
        for vec, level in zip(vecs, levels):
            g.add_node(vec, level)
        # add_node rebuilt vectors/levels; adjacency and the recorded entry
        # come straight from the snapshot.
        g.layers = layers
        g.entry = entry
        idx._ids = list(ids)
        for _ in range(level_draws):
            idx._rng.random()
        idx._level_draws = level_draws
        return idx

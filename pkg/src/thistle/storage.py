"""Corpus ingestion and durable persistence of records plus built indexes.

Corpus files are JSON Lines: one object per line with fields ``id`` (string),
``text`` (string, optional) and ``vector`` (array of numbers). Ingestion
cleans text by dropping every character that is not a letter, digit or
whitespace, then collapsing whitespace runs.

Snapshots are a single self-describing binary file: magic, format version,
payload length, header (backend, dim, flags, params, seed), the records in
insertion order, the backend's serialized state, and a trailing CRC32. All
numeric fields are little-endian, so a snapshot loads bit-identically across
platforms. Save and load are exclusive operations; do not mutate the index
while either runs.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path
from typing import Iterable

import numpy as np

from .bruteforce import FlatIndex
from .core import Backend, DocRecord, IndexConfig, VectorIndex
from .errors import (
    CorpusError,
    SnapshotChecksumError,
    SnapshotError,
    SnapshotTruncatedError,
    SnapshotVersionError,
)
from .hnsw import HnswIndex, HnswParams
from .lsh import LshIndex, LshParams
from .vecmath import Embedding

MAGIC = b"THISTLE\x00"
FORMAT_VERSION = 1

_BACKEND_CODES = {backend: i + 1 for i, backend in enumerate(Backend)}
_CODE_BACKENDS = {code: backend for backend, code in _BACKEND_CODES.items()}


def clean_text(text: str) -> str:
    """Strip characters outside letters/digits/whitespace, collapse whitespace."""
    kept = "".join(ch for ch in text if ch.isalnum() or ch.isspace())
    return " ".join(kept.split())


def ingest(path: str | Path, expected_dim: int | None = None) -> list[DocRecord]:
    """Parse a corpus file into records, preserving file order.

    Blank lines are skipped. Every error names the offending 1-based line.
    """
    records: list[DocRecord] = []
    seen: set[str] = set()
    dim = expected_dim
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"line {lineno}: invalid record: {exc}") from None
            if not isinstance(obj, dict):
                raise CorpusError(f"line {lineno}: expected an object, got {type(obj).__name__}")
            rid = obj.get("id")
            if not isinstance(rid, str) or not rid:
                raise CorpusError(f"line {lineno}: missing or empty 'id' field")
            if rid in seen:
                raise CorpusError(f"line {lineno}: duplicate id {rid!r}")
            seen.add(rid)
            text = obj.get("text", "")
            if not isinstance(text, str):
                raise CorpusError(f"line {lineno}: 'text' must be a string")
            vector = obj.get("vector")
            if vector is None:
                raise CorpusError(
                    f"line {lineno}: record has no 'vector' "
                    "(embed the corpus with the sidecar first)"
                )
            try:
                emb = Embedding(vector)
            except (ValueError, TypeError) as exc:
                raise CorpusError(f"line {lineno}: bad vector: {exc}") from None
            if dim is None:
                dim = emb.dim
            elif emb.dim != dim:
                raise CorpusError(
                    f"line {lineno}: vector has dim {emb.dim}, expected {dim}"
                )
            records.append(DocRecord(id=rid, text=clean_text(text), embedding=emb))
    return records


def write_corpus(records: Iterable[DocRecord], path: str | Path) -> None:
    """Write records back out as a corpus file (JSON Lines)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(
                json.dumps(
                    {"id": rec.id, "text": rec.text, "vector": rec.embedding.tolist()}
                )
                + "\n"
            )


# -- snapshot encoding ---------------------------------------------------------


class _Writer:
    def __init__(self) -> None:
        self.buf = bytearray()

    def raw(self, data: bytes) -> None:
        self.buf += data

    def u8(self, v: int) -> None:
        self.buf += struct.pack("<B", v)

    def u32(self, v: int) -> None:
        self.buf += struct.pack("<I", v)

    def u64(self, v: int) -> None:
        self.buf += struct.pack("<Q", v)

    def i64(self, v: int) -> None:
        self.buf += struct.pack("<q", v)

    def f64(self, v: float) -> None:
        self.buf += struct.pack("<d", v)

    def string(self, s: str) -> None:
        data = s.encode("utf-8")
        self.u32(len(data))
        self.raw(data)


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SnapshotTruncatedError(
                f"snapshot ends at byte {len(self.data)}, needed {self.pos + n}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return struct.unpack("<B", self.raw(1))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.raw(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.raw(8))[0]

    def i64(self) -> int:
        return struct.unpack("<q", self.raw(8))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.raw(8))[0]

    def string(self) -> str:
        return self.raw(self.u32()).decode("utf-8")


def save_snapshot(index: VectorIndex, path: str | Path) -> None:
    """Serialize an index so load_snapshot reproduces query-identical state.

    The file is written atomically: either the complete snapshot lands at
    ``path`` or nothing does.
    """
    config = index.config
    w = _Writer()
    w.u8(_BACKEND_CODES[config.backend])
    w.u8(1 if config.normalize_on_insert else 0)
    w.u32(config.dim)
    w.u64(len(index))
    w.i64(config.seed)
    if isinstance(index, HnswIndex):
        p = index.params
        w.u32(p.M)
        w.u32(p.ef_construction)
        w.u32(p.ef_search)
        w.f64(float("nan") if p.level_norm is None else p.level_norm)
        w.u64(index._level_draws)
    elif isinstance(index, LshIndex):
        w.u32(index.params.n_projections)
        w.u32(index.params.n_tables)
    for rid, vec in index._iter_entries():
        w.string(rid)
        w.string(index.text_of(rid))
        w.raw(vec.astype("<f4").tobytes())
    if isinstance(index, HnswIndex):
        _write_hnsw_state(w, index)
    elif isinstance(index, LshIndex):
        _write_lsh_state(w, index)
    body = bytes(w.buf)
    head = _Writer()
    head.raw(MAGIC)
    head.u8(FORMAT_VERSION)
    head.u64(len(body))
    payload = bytes(head.buf) + body
    blob = payload + struct.pack("<I", zlib.crc32(payload))
    tmp = Path(str(path) + ".tmp")
    tmp.write_bytes(blob)
    os.replace(tmp, path)


def _write_hnsw_state(w: _Writer, index: HnswIndex) -> None:
    g = index.graph
    w.i64(-1 if g.entry is None else g.entry)
    for level in g.levels:
        w.u32(level)
    w.u32(len(g.layers))
    for layer in g.layers:
        w.u32(len(layer))
        for handle in sorted(layer):
            nbrs = sorted(layer[handle])
            w.u32(handle)
            w.u32(len(nbrs))
            for nbr in nbrs:
                w.u32(nbr)


def _write_lsh_state(w: _Writer, index: LshIndex) -> None:
    for planes, table in zip(index._planes, index.buckets):
        w.raw(planes.astype("<f8").tobytes())
        w.u32(len(table))
        for sig in sorted(table):
            w.u64(sig)
            handles = table[sig]
            w.u32(len(handles))
            for handle in handles:
                w.u32(handle)


def load_snapshot(path: str | Path) -> VectorIndex:
    """Read a snapshot written by save_snapshot, restoring exact state."""
    data = Path(path).read_bytes()
    prefix_len = len(MAGIC) + 1 + 8
    if len(data) < prefix_len:
        raise SnapshotTruncatedError(
            f"file holds {len(data)} bytes, shorter than the snapshot prefix"
        )
    if data[: len(MAGIC)] != MAGIC:
        raise SnapshotError("not a snapshot file (bad magic bytes)")
    version = data[len(MAGIC)]
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(
            f"snapshot format version {version}, this build reads {FORMAT_VERSION}"
        )
    (body_len,) = struct.unpack_from("<Q", data, len(MAGIC) + 1)
    total = prefix_len + body_len + 4
    if len(data) < total:
        raise SnapshotTruncatedError(
            f"snapshot declares {total} bytes but file holds {len(data)}"
        )
    payload = data[: prefix_len + body_len]
    (stored_crc,) = struct.unpack_from("<I", data, prefix_len + body_len)
    if zlib.crc32(payload) != stored_crc:
        raise SnapshotChecksumError("snapshot payload does not match its checksum")
    r = _Reader(payload)
    r.raw(prefix_len)
    backend_code = r.u8()
    if backend_code not in _CODE_BACKENDS:
        raise SnapshotError(f"unknown backend code {backend_code}")
    backend = _CODE_BACKENDS[backend_code]
    normalize = bool(r.u8())
    dim = r.u32()
    count = r.u64()
    seed = r.i64()
    hnsw_params = None
    lsh_params = None
    level_draws = 0
    if backend in (Backend.HNSW_COSINE, Backend.HNSW_EUCLIDEAN):
        m = r.u32()
        efc = r.u32()
        efs = r.u32()
        level_norm = r.f64()
        level_draws = r.u64()
        hnsw_params = HnswParams(
            M=m,
            ef_construction=efc,
            ef_search=efs,
            level_norm=None if np.isnan(level_norm) else level_norm,
            seed=seed,
        )
    elif backend is Backend.LSH:
        lsh_params = LshParams(n_projections=r.u32(), n_tables=r.u32(), seed=seed)
    config = IndexConfig(
        backend=backend,
        dim=dim,
        normalize_on_insert=normalize,
        hnsw=hnsw_params,
        lsh=lsh_params,
    )
    ids: list[str] = []
    texts: list[str] = []
    vecs: list[np.ndarray] = []
    for _ in range(count):
        ids.append(r.string())
        texts.append(r.string())
        vec = np.frombuffer(r.raw(4 * dim), dtype="<f4").astype(np.float32)
        vecs.append(vec)
    if backend in (Backend.ITER_COSINE, Backend.ITER_EUCLIDEAN):
        index: VectorIndex = FlatIndex._restore(config, ids, vecs)
    elif backend in (Backend.HNSW_COSINE, Backend.HNSW_EUCLIDEAN):
        entry = r.i64()
        levels = [r.u32() for _ in range(count)]
        n_layers = r.u32()
        layers: list[dict[int, set[int]]] = []
        for _ in range(n_layers):
            layer: dict[int, set[int]] = {}
            for _ in range(r.u32()):
                handle = r.u32()
                layer[handle] = {r.u32() for _ in range(r.u32())}
            layers.append(layer)
        index = HnswIndex._restore(
            config,
            ids,
            vecs,
            levels,
            layers,
            None if entry < 0 else entry,
            level_draws,
        )
    else:
        assert config.lsh is not None
        planes = []
        buckets: list[dict[int, list[int]]] = []
        p, t = config.lsh.n_projections, config.lsh.n_tables
        for _ in range(t):
            mat = np.frombuffer(r.raw(8 * p * dim), dtype="<f8").reshape(p, dim)
            planes.append(mat.astype(np.float64))
            table: dict[int, list[int]] = {}
            for _ in range(r.u32()):
                sig = r.u64()
                table[sig] = [r.u32() for _ in range(r.u32())]
            buckets.append(table)
        index = LshIndex._restore(config, ids, vecs, planes, buckets)
    for rid, text in zip(ids, texts):
        index._texts[rid] = text
    return index

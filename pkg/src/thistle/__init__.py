"""Thistle: an embedding store with interchangeable exact and approximate
top-k retrieval backends, durable snapshots, and a benchmark harness."""

from .core import (
    ALL_BACKENDS,
    Backend,
    DocRecord,
    IndexConfig,
    InsertReport,
    QueryResult,
    QueryStats,
    VectorIndex,
    build_index,
    default_configs,
)
from .errors import (
    ConfigError,
    CorpusError,
    DimensionMismatchError,
    DuplicateIdError,
    EmptyIndexError,
    SidecarError,
    SnapshotChecksumError,
    SnapshotError,
    SnapshotTruncatedError,
    SnapshotVersionError,
    ThistleError,
    ZeroVectorError,
)
from .evalharness import EvalPair, EvalReport, clustered_workload, run_eval, run_matrix
from .hnsw import HnswIndex, HnswParams
from .lsh import LshIndex, LshParams
from .bruteforce import FlatIndex
from .storage import clean_text, ingest, load_snapshot, save_snapshot, write_corpus
from .vecmath import DEFAULT_DIM, Embedding, cosine_distance, euclidean_distance

__version__ = "0.1.0"

__all__ = [
    "ALL_BACKENDS",
    "Backend",
    "ConfigError",
    "CorpusError",
    "DEFAULT_DIM",
    "DimensionMismatchError",
    "DocRecord",
    "DuplicateIdError",
    "Embedding",
    "EmptyIndexError",
    "EvalPair",
    "EvalReport",
    "FlatIndex",
    "HnswIndex",
    "HnswParams",
    "IndexConfig",
    "InsertReport",
    "LshIndex",
    "LshParams",
    "QueryResult",
    "QueryStats",
    "SidecarError",
    "SnapshotChecksumError",
    "SnapshotError",
    "SnapshotTruncatedError",
    "SnapshotVersionError",
    "ThistleError",
    "VectorIndex",
    "ZeroVectorError",
    "build_index",
    "clean_text",
    "clustered_workload",
    "cosine_distance",
    "default_configs",
    "euclidean_distance",
    "ingest",
    "load_snapshot",
    "run_eval",
    "run_matrix",
    "save_snapshot",
    "write_corpus",
]

"""Embedding vectors and the two distance metrics every index backend consumes.

Coordinates are stored as float32 (what sentence-embedding models emit, and
half the memory of float64); all distance arithmetic promotes to float64 so
rounding error stays bounded. Everything here is a pure function over
immutable inputs and is safe to call concurrently.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ZeroVectorError

DEFAULT_DIM = 768


class Embedding:
    """A fixed-length vector of finite real numbers.

    Invariants: at least one coordinate, every coordinate finite after the
    float32 cast. The underlying array is marked read-only.
    """

    __slots__ = ("values",)

    def __init__(self, values: Sequence[float] | np.ndarray) -> None:
        with np.errstate(over="ignore"):  # overflow surfaces as inf, rejected below
            arr = np.array(values, dtype=np.float32, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("embedding must be a non-empty 1-d sequence of numbers")
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding entries must be finite (no NaN or infinity)")
        arr.setflags(write=False)
        self.values = arr

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def normalized(self) -> "Embedding":
        """Return a unit-L2 copy; raises ZeroVectorError for the zero vector."""
        v64 = self.values.astype(np.float64)
        norm = float(np.sqrt((v64 * v64).sum()))
        if norm == 0.0:
            raise ZeroVectorError("cannot normalize an all-zero vector")
        return Embedding(v64 / norm)

    def tolist(self) -> list[float]:
        return [float(x) for x in self.values]

    def __len__(self) -> int:
        return self.dim

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.all(self.values == other.values)
        )

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        head = ", ".join(f"{x:g}" for x in self.values[:4])
        tail = ", ..." if self.dim > 4 else ""
        return f"Embedding([{head}{tail}], dim={self.dim})"


def _check_dims(a: Embedding, b: Embedding) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(
            f"dimension mismatch: left operand has dim {a.dim}, right has dim {b.dim}"
        )


def euclidean_distance(a: Embedding, b: Embedding) -> float:
    """L2 distance sqrt(sum((a_i - b_i)^2)); symmetric, zero iff a == b."""
    _check_dims(a, b)
    diff = a.values.astype(np.float64) - b.values.astype(np.float64)
    return float(np.sqrt((diff * diff).sum()))


def cosine_distance(a: Embedding, b: Embedding) -> float:
    """1 - cos(angle between a and b); in [0, 2], invariant to positive scaling.

    The similarity term is clamped to [-1, 1] before subtraction so rounding
    on near-parallel vectors cannot push the result out of range. All-zero
    inputs are rejected: the distance is undefined and should fail loudly.
    """
    _check_dims(a, b)
    a64 = a.values.astype(np.float64)
    b64 = b.values.astype(np.float64)
    na = float(np.sqrt((a64 * a64).sum()))
    nb = float(np.sqrt((b64 * b64).sum()))
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine distance is undefined for all-zero vectors")
    sim = float(a64 @ b64) / (na * nb)
    return 1.0 - max(-1.0, min(1.0, sim))


# Batched kernels shared by the index backends. Rows are float64 copies of the
# stored float32 vectors; callers precompute row norms once at insert time.

def stack64(vectors: Iterable[np.ndarray]) -> np.ndarray:
    """Stack float32 vectors into an (n, dim) float64 matrix."""
    vecs = list(vectors)
    if not vecs:
        return np.empty((0, 0), dtype=np.float64)
    return np.asarray(vecs, dtype=np.float64)


def row_norms(rows64: np.ndarray) -> np.ndarray:
    return np.sqrt((rows64 * rows64).sum(axis=1))


def euclidean_to_rows(rows64: np.ndarray, q64: np.ndarray) -> np.ndarray:
    diff = rows64 - q64
    return np.sqrt((diff * diff).sum(axis=1))


def cosine_to_rows(
    rows64: np.ndarray, norms64: np.ndarray, q64: np.ndarray, q_norm: float
) -> np.ndarray:
    sims = (rows64 @ q64) / (norms64 * q_norm)
    return 1.0 - np.clip(sims, -1.0, 1.0)

import numpy as np
import pytest

from thistle import DocRecord, Embedding


def random_records(n, dim, seed, prefix="r"):
    rng = np.random.default_rng(seed)
    rows = rng.standard_normal((n, dim))
    return [
        DocRecord(f"{prefix}{i:05d}", f"passage {i}", Embedding(rows[i]))
        for i in range(n)
    ]


def as_lists(records):
    """(id, vector-as-float-list) pairs for the naive oracle."""
    return [(rec.id, [float(x) for x in rec.embedding.values]) for rec in records]


@pytest.fixture
def small_records():
    return random_records(50, 8, seed=11)

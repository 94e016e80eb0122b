"""Distance metric contracts: worked examples, error cases, metric properties."""

import math

import numpy as np
import pytest

from thistle import (
    DimensionMismatchError,
    Embedding,
    ZeroVectorError,
    cosine_distance,
    euclidean_distance,
)


class TestEmbedding:
    def test_stores_float32(self):
        emb = Embedding([1.0, 2.0, 3.0])
        assert emb.values.dtype == np.float32
        assert emb.dim == 3

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Embedding([])

    def test_rejects_nan_and_inf(self):
        with pytest.raises(ValueError):
            Embedding([1.0, float("nan")])
        with pytest.raises(ValueError):
            Embedding([1.0, float("inf")])

    def test_rejects_overflowing_float32(self):
        # finite in float64 but infinite after the float32 cast
        with pytest.raises(ValueError):
            Embedding([1e300])

    def test_rejects_non_1d(self):
        with pytest.raises(ValueError):
            Embedding([[1.0, 2.0], [3.0, 4.0]])

    def test_values_read_only(self):
        emb = Embedding([1.0, 2.0])
        with pytest.raises(ValueError):
            emb.values[0] = 5.0

    def test_does_not_alias_caller_array(self):
        src = np.array([1.0, 2.0], dtype=np.float32)
        emb = Embedding(src)
        src[0] = 9.0
        assert emb.values[0] == 1.0

    def test_equality(self):
        assert Embedding([1, 2]) == Embedding([1.0, 2.0])
        assert Embedding([1, 2]) != Embedding([1, 3])

    def test_normalized_unit_length(self):
        emb = Embedding([3.0, 4.0]).normalized()
        assert math.isclose(float((emb.values.astype(float) ** 2).sum()), 1.0, abs_tol=1e-7)

    def test_normalize_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            Embedding([0.0, 0.0]).normalized()


class TestEuclidean:
    def test_3_4_5_triangle(self):
        assert euclidean_distance(Embedding([0, 0]), Embedding([3, 4])) == 5.0

    def test_identity(self):
        assert euclidean_distance(Embedding([1, 2, 3]), Embedding([1, 2, 3])) == 0.0

    def test_hand_summed_example(self):
        # squared diffs: 1 + 1 + 1 + 4 = 7
        d = euclidean_distance(Embedding([1, 0, 0, 2]), Embedding([0, 1, 1, 0]))
        assert d == pytest.approx(math.sqrt(7), abs=1e-12)

    def test_dimension_mismatch_names_both_dims(self):
        with pytest.raises(DimensionMismatchError, match="2.*3|3.*2"):
            euclidean_distance(Embedding([1, 2]), Embedding([1, 2, 3]))


class TestCosine:
    def test_identical_direction(self):
        assert cosine_distance(Embedding([1, 0]), Embedding([1, 0])) == 0.0

    def test_orthogonal(self):
        assert cosine_distance(Embedding([1, 0]), Embedding([0, 1])) == 1.0

    def test_antiparallel(self):
        d = cosine_distance(Embedding([1, 1]), Embedding([-1, -1]))
        assert d == pytest.approx(2.0, abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_distance(Embedding([1]), Embedding([1, 2]))

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVectorError):
            cosine_distance(Embedding([0, 0]), Embedding([1, 0]))
        with pytest.raises(ZeroVectorError):
            cosine_distance(Embedding([1, 0]), Embedding([0, 0]))


def _random_embeddings(rng, count, dim):
    return [Embedding(rng.standard_normal(dim)) for _ in range(count)]


class TestMetricProperties:
    def test_symmetry(self):
        rng = np.random.default_rng(4)
        for a, b in zip(_random_embeddings(rng, 50, 12), _random_embeddings(rng, 50, 12)):
            assert euclidean_distance(a, b) == pytest.approx(
                euclidean_distance(b, a), abs=1e-9
            )
            assert cosine_distance(a, b) == pytest.approx(
                cosine_distance(b, a), abs=1e-9
            )

    def test_triangle_inequality(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            a, b, c = _random_embeddings(rng, 3, 10)
            assert euclidean_distance(a, c) <= (
                euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-9
            )

    def test_cosine_scale_invariance(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            a, b = _random_embeddings(rng, 2, 16)
            scale = float(rng.uniform(0.01, 100.0))
            scaled = Embedding(a.values.astype(np.float64) * scale)
            assert cosine_distance(scaled, b) == pytest.approx(
                cosine_distance(a, b), abs=1e-7
            )

    def test_cosine_range(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            a, b = _random_embeddings(rng, 2, 6)
            d = cosine_distance(a, b)
            assert -1e-9 <= d <= 2.0 + 1e-9

    def test_euclidean_zero_iff_equal(self):
        rng = np.random.default_rng(8)
        a, b = _random_embeddings(rng, 2, 9)
        assert euclidean_distance(a, a) == 0.0
        assert euclidean_distance(a, b) > 0.0

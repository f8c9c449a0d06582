import numpy as np
import pytest

from splines.basis import evaluate_spline
from splines.knot_vector import KnotVector, make_uniform
from splines.refinement import (
    elevate_degree,
    elevated_knot_vector,
    elevation_matrix,
    insert_knots,
    k_refine,
)

POINTS = np.linspace(0, 1, 57)


@pytest.fixture
def coefficients():
    return np.random.default_rng(3).standard_normal(make_uniform(2, 3).num_basis)


class TestKnotInsertion:
    """Boehm insertion keeps every spline unchanged."""

    def test_preserves_spline(self, coefficients):
        kv = make_uniform(2, 3)
        refined, T = insert_knots(kv, [0.1, 0.5, 0.5, 0.9])
        assert T.shape == (kv.num_basis + 4, kv.num_basis)
        np.testing.assert_allclose(
            evaluate_spline(refined, T @ coefficients, POINTS),
            evaluate_spline(kv, coefficients, POINTS),
            atol=1e-13,
        )

    def test_rows_sum_to_one(self):
        _, T = insert_knots(make_uniform(3, 2), [0.25, 0.75])
        np.testing.assert_allclose(T.sum(axis=1), 1.0)

    def test_empty_insertion_is_identity(self):
        kv = make_uniform(2, 3)
        refined, T = insert_knots(kv, [])
        assert refined == kv
        np.testing.assert_array_equal(T, np.eye(kv.num_basis))

    def test_existing_knot_raises_multiplicity(self):
        kv = make_uniform(2, 2)
        refined, _ = insert_knots(kv, [0.5])
        np.testing.assert_array_equal(refined.multiplicities, [3, 2, 3])

    def test_multiplicity_limit(self):
        kv = make_uniform(2, 2, 3)
        with pytest.raises(ValueError):
            insert_knots(kv, [0.5])

    @pytest.mark.parametrize('t', [0.0, 1.0, 1.2])
    def test_rejects_end_knots(self, t):
        with pytest.raises(ValueError):
            insert_knots(make_uniform(2, 2), [t])


class TestDegreeElevation:
    """Elevation raises every multiplicity and keeps the spline."""

    def test_preserves_spline(self, coefficients):
        kv = make_uniform(2, 3)
        elevated, c = elevate_degree(kv, coefficients, 2)
        assert elevated.degree == 4
        np.testing.assert_allclose(
            evaluate_spline(elevated, c, POINTS),
            evaluate_spline(kv, coefficients, POINTS),
            atol=1e-12,
        )

    def test_elevated_multiplicities(self):
        kv = make_uniform(2, 4, 2)
        elevated = elevated_knot_vector(kv, 1)
        np.testing.assert_array_equal(elevated.multiplicities, kv.multiplicities + 1)

    def test_zero_elevation(self):
        kv = make_uniform(2, 2)
        same, T = elevation_matrix(kv, 0)
        assert same == kv
        np.testing.assert_array_equal(T, np.eye(kv.num_basis))

    def test_negative_elevation(self):
        with pytest.raises(ValueError):
            elevation_matrix(make_uniform(2, 2), -1)

    def test_rejects_discontinuous_knot(self):
        kv = KnotVector(2, [0, 0, 0, 0.5, 0.5, 0.5, 1, 1, 1])
        with pytest.raises(ValueError, match="multiplicity 3"):
            elevation_matrix(kv, 1)
        with pytest.raises(ValueError):
            elevate_degree(kv, np.ones(kv.num_basis), 1)


class TestKRefinement:
    """Elevation first, then insertion."""

    def test_inserted_knot_regularity(self):
        linear = KnotVector(1, [0, 0, 1, 1])
        refined, T = k_refine(linear, 2, [0.5])
        assert refined.degree == 3
        np.testing.assert_array_equal(refined.regularities, [-1, 2, -1])
        assert T.shape == (5, 2)

    def test_reproduces_linear_map(self):
        linear = KnotVector(1, [0, 0, 1, 1])
        refined, T = k_refine(linear, 1, [0.25, 0.5, 0.5])
        np.testing.assert_allclose(
            evaluate_spline(refined, T @ np.array([0.0, 1.0]), POINTS), POINTS, atol=1e-14
        )

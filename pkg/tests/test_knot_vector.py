import numpy as np
import pytest

from splines.knot_vector import (
    KnotVector,
    graded_breakpoints,
    knots_from_breakpoints,
    make_graded,
    make_uniform,
)


class TestKnotVector:
    """Validation and derived quantities of open knot vectors."""

    def test_uniform_quadratic(self):
        kv = make_uniform(2, 4)
        np.testing.assert_allclose(kv.knots, [0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1])
        assert kv.num_basis == 6
        assert kv.num_elements == 4
        np.testing.assert_array_equal(kv.multiplicities, [3, 1, 1, 1, 3])
        np.testing.assert_array_equal(kv.regularities[1:-1], [1, 1, 1])

    def test_rejects_short_vector(self):
        with pytest.raises(ValueError):
            KnotVector(2, [0, 0, 1, 1])

    def test_rejects_decreasing_knots(self):
        with pytest.raises(ValueError):
            KnotVector(1, [0, 0, 0.6, 0.4, 1, 1])

    def test_rejects_wrong_end_multiplicity(self):
        with pytest.raises(ValueError):
            KnotVector(2, [0, 0, 0.5, 1, 1, 1])

    def test_rejects_interval_other_than_unit(self):
        with pytest.raises(ValueError):
            KnotVector(1, [0, 0, 2, 2])

    def test_knots_are_read_only(self):
        kv = make_uniform(1, 2)
        with pytest.raises(ValueError):
            kv.knots[0] = 0.5

    def test_greville(self):
        kv = make_uniform(2, 2)
        np.testing.assert_allclose(kv.greville(), [0.0, 0.25, 0.75, 1.0])

    def test_support(self):
        kv = make_uniform(2, 4)
        assert kv.support(2) == (0.0, 0.75)

    def test_callable_multiplicity_rule(self):
        kv = make_uniform(3, 4, lambda j: 2 if j % 2 else 1)
        np.testing.assert_array_equal(kv.multiplicities, [4, 2, 1, 2, 4])

    def test_multiplicity_sequence_length_checked(self):
        with pytest.raises(ValueError):
            make_uniform(2, 4, [1, 2])

    def test_multiplicity_above_p_plus_one(self):
        with pytest.raises(ValueError):
            knots_from_breakpoints(2, [0, 0.5, 1], [4])

    def test_text_round_trip(self):
        kv = make_graded(3, 5, 0.3, 2)
        again = KnotVector(3, [float(s) for s in kv.to_list()])
        assert again == kv
        assert hash(again) == hash(kv)


class TestGrading:
    """Graded breakpoints ((j-1)/J)^(1/mu)."""

    def test_graded_breakpoints(self):
        np.testing.assert_allclose(graded_breakpoints(4, 0.5), [0, 1 / 16, 1 / 4, 9 / 16, 1])

    def test_mu_one_is_uniform(self):
        assert make_graded(2, 5, 1.0) == make_uniform(2, 5)

    @pytest.mark.parametrize('mu', [0.0, -0.5, 1.5])
    def test_mu_out_of_range(self, mu):
        with pytest.raises(ValueError):
            graded_breakpoints(4, mu)

    def test_zero_subdivisions(self):
        with pytest.raises(ValueError):
            make_uniform(2, 0)

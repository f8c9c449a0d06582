import math

import pytest

from analysis.grading import mode_grading, strong_grading


class TestGrading:
    """Radial grading parameters from the angular orders."""

    @pytest.mark.parametrize('omega, p, mu', [
        (2 * math.pi, 2, 0.225),
        (2 * math.pi, 3, 0.15),
        (0.5 * math.pi, 2, 1.0),
        (math.pi, 3, 1.0),
        (math.pi, 2, 1.0),
        (2 * math.pi / 3, 3, 0.45),
    ])
    def test_strong(self, omega, p, mu):
        assert strong_grading(omega, p) == pytest.approx(mu)

    @pytest.mark.parametrize('p, k, mu', [
        (2, 2, 1.0),
        (2, 5, 1.0),
        (3, 3, 0.45),
        (3, 1, 0.15),
    ])
    def test_mode(self, p, k, mu):
        assert mode_grading(2 * math.pi, p, k) == pytest.approx(mu)

    def test_smooth_mode_needs_no_grading(self):
        assert mode_grading(1.0, 4, 0) == 1.0

    @pytest.mark.parametrize('omega, p', [(0.0, 2), (7.0, 2), (math.pi, 0)])
    def test_invalid(self, omega, p):
        with pytest.raises(ValueError):
            strong_grading(omega, p)

    def test_negative_mode(self):
        with pytest.raises(ValueError):
            mode_grading(math.pi, 2, -1)

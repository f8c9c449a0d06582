import math

import numpy as np
import pytest

from core.exceptions import SingularPointError
from geometry.sector import build_sector, unit_square


@pytest.fixture
def grid():
    rng = np.random.default_rng(5)
    return rng.uniform(1e-3, 1, 300), rng.uniform(0, 1, 300)


class TestSectorGeometry:
    """Exactness of the rational sector parameterization."""

    @pytest.mark.parametrize('omega, n_arc', [(2 * math.pi, 4), (math.pi, 2), (0.5 * math.pi, 1), (1.0, 1), (3.5, 3)])
    def test_arc_count(self, omega, n_arc):
        assert build_sector(omega).n_arc == n_arc

    @pytest.mark.parametrize('omega', [2 * math.pi, math.pi, 1.0, 3.5])
    def test_radius_equals_first_parameter(self, omega, grid):
        geo = build_sector(omega)
        z1, z2 = grid
        np.testing.assert_allclose(np.hypot(*geo.map(z1, z2).T), z1, atol=1e-12)

    def test_coarse_control_net(self, disk):
        assert disk.basis.shape == (2, 9)
        np.testing.assert_array_equal(disk.control_points[0::2], 0.0)
        np.testing.assert_allclose(disk.control_points[3], [1.0, 1.0])
        np.testing.assert_allclose(disk.weights[3], 1 / math.sqrt(2))
        np.testing.assert_allclose(disk.weighted_control_points[3], [1 / math.sqrt(2)] * 2)

    def test_weight_bounds(self, disk, grid):
        W, _ = disk.eval_weight(*grid)
        assert np.all(W >= (2 + math.sqrt(2)) / 4 - 1e-12)
        assert np.all(W <= 1 + 1e-12)

    def test_polar_angle_at_arc_points(self, disk):
        z2 = np.arange(9) / 8
        np.testing.assert_allclose(disk.polar_angle(z2), np.arange(9) * math.pi / 4, atol=1e-12)

    def test_polar_angle_matches_map(self, quarter):
        z2 = np.linspace(0, 1, 11)
        x, y = quarter.map(np.full(11, 0.5), z2).T
        np.testing.assert_allclose(quarter.polar_angle(z2), np.arctan2(y, x), atol=1e-12)

    def test_jacobian_positive(self, disk, grid):
        _, det = disk.jacobian(*grid)
        assert np.all(det > 0)

    def test_jacobian_matches_finite_differences(self, disk):
        # away from the C0 arc joints at z2 = i/4
        z1 = np.array([0.2, 0.5, 0.9, 0.35])
        z2 = np.array([0.1, 0.37, 0.6, 0.88])
        step = 1e-6
        jac, _ = disk.jacobian(z1, z2)
        d1 = (disk.map(z1 + step, z2) - disk.map(z1 - step, z2)) / (2 * step)
        d2 = (disk.map(z1, z2 + step) - disk.map(z1, z2 - step)) / (2 * step)
        np.testing.assert_allclose(jac[:, :, 0], d1, atol=1e-7)
        np.testing.assert_allclose(jac[:, :, 1], d2, atol=1e-6)

    @pytest.mark.parametrize('z2', [0.05, 0.3, 0.7])
    def test_jacobian_determinant_linear_in_radius(self, disk, z2):
        _, det = disk.jacobian([0.25, 0.5], [z2, z2])
        assert det[1] == pytest.approx(2.0 * det[0], rel=1e-12)

    def test_jacobian_singular_edge(self, disk):
        with pytest.raises(SingularPointError):
            disk.jacobian([0.0, 0.5], [0.3, 0.3])

    def test_area(self, disk):
        assert disk.area == pytest.approx(math.pi)

    @pytest.mark.parametrize('omega', [0.0, -1.0, 7.0])
    def test_invalid_angle(self, omega):
        with pytest.raises(ValueError):
            build_sector(omega)

    def test_to_dict(self, disk):
        data = disk.to_dict()
        assert data['shape'] == [2, 9]
        assert len(data['control_points']) == 18
        assert data['knots_2'][3] == '0.25'


class TestUnitSquare:
    """The bilinear identity patch."""

    def test_identity_map(self, grid):
        square = unit_square()
        z1, z2 = grid
        np.testing.assert_allclose(square.map(z1, z2), np.column_stack([z1, z2]), atol=1e-14)
        jac, det = square.jacobian(z1, z2)
        np.testing.assert_allclose(det, 1.0)
        np.testing.assert_allclose(jac[0], np.eye(2), atol=1e-14)

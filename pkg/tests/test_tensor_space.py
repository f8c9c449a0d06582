import numpy as np
import pytest

from spaces.tensor_space import build_tensor_space, dirichlet_mask, geometry_space, tensor_shape


@pytest.fixture
def grid():
    rng = np.random.default_rng(17)
    return rng.uniform(1e-3, 1, 250), rng.uniform(0, 1, 250)


class TestTensorSpace:
    """k-refined tensor spaces on the sector."""

    def test_sizes(self, small_space):
        assert small_space.shape == (4, 13)
        assert small_space.num_dofs == 52
        assert dirichlet_mask(small_space).sum() == 13

    def test_shape_formula(self, disk, quarter):
        for geo, p, k, J1, J2 in [(disk, 2, 1, 2, 8), (disk, 3, 0, 3, 12), (quarter, 4, 3, 5, 3), (quarter, 3, 1, 1, 1)]:
            space = build_tensor_space(geo, p, k, J1, J2, mu=0.4)
            assert tensor_shape(geo, p, k, J1, J2) == space.shape

    def test_knot_regularities(self, disk):
        space = build_tensor_space(disk, 3, 1, 3, 8, mu=0.5)
        np.testing.assert_array_equal(space.kv1.regularities[1:-1], [1, 1])
        regs = dict(zip(np.round(space.kv2.breakpoints, 12), space.kv2.regularities))
        assert regs[0.25] == 0 and regs[0.5] == 0 and regs[0.75] == 0
        assert regs[0.125] == 1 and regs[0.875] == 1

    def test_geometry_is_preserved(self, disk, small_space, grid):
        np.testing.assert_allclose(small_space.map(*grid), disk.map(*grid), atol=1e-12)

    def test_weights_unchanged_by_refinement(self, disk, grid):
        space = build_tensor_space(disk, 3, 2, 3, 8, mu=0.3)
        ev = space.evaluate(*grid)
        W, _ = disk.eval_weight(*grid)
        np.testing.assert_allclose(ev.weight, W, atol=1e-12)

    def test_partition_of_unity(self, small_space, grid):
        ev = small_space.evaluate(*grid)
        np.testing.assert_allclose(ev.values.sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(ev.gradients.sum(axis=1), 0.0, atol=1e-10)

    def test_only_outer_functions_on_circular_edge(self, small_space):
        ev = small_space.evaluate(np.ones(20), np.linspace(0, 1, 20))
        mask = small_space.dirichlet_mask()
        nonzero = np.abs(ev.values) > 1e-14
        assert np.all(mask[ev.indices[nonzero]])

    def test_coarse_geometry_space(self, disk):
        space = geometry_space(disk)
        assert space.num_dofs == 18
        assert space.dirichlet_mask().sum() == 9
        assert space.mesh.num_elements == 4

    @pytest.mark.parametrize('p, k', [(1, 0), (2, 2), (3, -1)])
    def test_invalid_degree_or_regularity(self, disk, p, k):
        with pytest.raises(ValueError):
            build_tensor_space(disk, p, k, 2, 8)

    def test_angular_subdivision_must_match_arcs(self, disk):
        with pytest.raises(ValueError):
            build_tensor_space(disk, 2, 1, 2, 6)

    def test_summary(self, small_space):
        summary = small_space.summary()
        assert summary['kind'] == 'tensor'
        assert summary['dofs'] == 52
        assert summary['constrained'] == 13

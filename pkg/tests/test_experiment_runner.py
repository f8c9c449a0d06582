import math
from dataclasses import replace

import numpy as np
import pytest

from config.experiment import ExperimentConfig
from core.exceptions import ConfigError, RateTargetMissed, SectorIGAError
from exact.spectrum import find_pair
from services.experiment_runner import DOF_MATCH_TOLERANCE, ExperimentRunner, exact_rank
from services.parallel_runner import ParallelRunner
from spaces.tensor_space import tensor_shape


@pytest.fixture
def runner():
    return ExperimentRunner(ParallelRunner(1))


@pytest.fixture
def small_config():
    return ExperimentConfig(schedule=(2,), angular_ratio=1, mode=(0, 1)).validate()


@pytest.fixture
def small_level(runner, small_config):
    return runner.run_solve(small_config, 2)


class TestExperimentRunner:
    """Single solves, spectrum tables and grading suggestions."""

    def test_exact_rank(self):
        rank, pairs = exact_rank(2 * math.pi, 1, 1)
        assert rank == 1
        assert pairs[rank].nu == 0.5

    def test_run_exact(self, runner):
        rows = runner.run_exact(2 * math.pi, 5)
        assert [row['index'] for row in rows] == [1, 2, 3, 4, 5]
        assert rows[0]['frequency'] == pytest.approx(2.404825557695773)
        assert rows[0]['regularity'] == 'smooth'
        assert math.isinf(rows[0]['sobolev_limit'])
        assert rows[1]['sobolev_limit'] == pytest.approx(1.5)

    def test_suggest_mu(self, runner):
        assert runner.suggest_mu(2 * math.pi, 2) == {'strong': pytest.approx(0.225)}
        assert runner.suggest_mu(2 * math.pi, 3, k=3)['mode'] == pytest.approx(0.45)

    def test_build_tensor_space(self, runner):
        config = ExperimentConfig(angular_ratio=2)
        geo, space, J2, levels = runner.build_space(config, 3)
        assert J2 == 24
        assert levels == 0
        assert space.shape == tensor_shape(geo, 2, 1, 3, 24)
        assert space.mu == pytest.approx(0.225)

    def test_build_hierarchical_space(self, runner):
        config = ExperimentConfig(mesh='hierarchical', schedule=(2, 4), angular_ratio=1).validate()
        _, space, J2, levels = runner.build_space(config, 4)
        assert levels == 2
        assert J2 == 16
        assert space.ring_angular_counts == (4, 8, 16, 16)
        assert not space.rational

    def test_build_hierarchical_nurbs_space(self, runner):
        config = ExperimentConfig(mesh='hierarchical', hierarchical_basis='nurbs', schedule=(8,)).validate()
        _, space, J2, levels = runner.build_space(config, 8)
        assert levels == 5
        assert J2 == 128
        assert space.rational
        assert space.ring_angular_counts == (4, 8, 16, 32, 64, 128, 128, 128)

    @pytest.mark.parametrize('J1', [3, 4])
    def test_hierarchical_level_count_checked(self, runner, J1):
        config = ExperimentConfig(mesh='hierarchical', schedule=(8,))
        with pytest.raises(ConfigError):
            runner.build_space(config, J1)

    def test_run_solve(self, small_level):
        assert small_level.system.num_free == 39
        assert len(small_level.reports) == 3
        target = small_level.reports[0]
        assert (target.k, target.m) == (0, 1)
        assert target.eigenvalue_h == pytest.approx(target.eigenvalue, rel=0.2)
        assert np.isfinite(target.h1_error) and target.l2_error <= target.h1_error
        assert all(math.isnan(r.h1_error) for r in small_level.reports[1:])
        assert small_level.aligned.shape == (52,)

    def test_level_summary(self, small_level):
        summary = small_level.summary()
        assert summary['eigen_method'] == 'dense'
        assert summary['space_dofs'] == 52
        assert summary['kind'] == 'tensor'

    def test_sample_field(self, runner, small_level):
        rows = runner.sample_field(small_level, find_pair(2 * math.pi, 0, 1), n_radial=4, n_angular=8)
        assert len(rows) == 36
        assert set(rows[0]) == {'r', 'phi', 'x', 'y', 'u_h', 'u'}
        assert min(row['r'] for row in rows) == 0.25
        outer = [row for row in rows if row['r'] == 1.0]
        np.testing.assert_allclose([row['u_h'] for row in outer], 0.0, atol=1e-12)

    def test_sample_field_needs_aligned_function(self, runner, small_level):
        small_level.aligned = None
        with pytest.raises(SectorIGAError):
            runner.sample_field(small_level, find_pair(2 * math.pi, 0, 1))

    def test_matched_mesh_keeps_aspect(self, runner, disk):
        config = ExperimentConfig(angular_ratio=1, target_dofs=200)
        assert runner.matched_mesh(disk, config, 2, 1) == (6, 24)

    @pytest.mark.parametrize('p, k, target', [(2, 0, 200), (3, 2, 915), (3, 0, 915), (5, 4, 915), (5, 0, 915)])
    def test_matched_mesh_within_tolerance(self, runner, disk, p, k, target):
        config = ExperimentConfig(angular_ratio=1, target_dofs=target)
        J1, J2 = runner.matched_mesh(disk, config, p, k)
        assert J2 % disk.n_arc == 0
        n1, n2 = tensor_shape(disk, p, k, J1, J2)
        assert abs((n1 - 1) * n2 - target) <= DOF_MATCH_TOLERANCE * target

    def test_spectrum_compare(self, runner):
        config = ExperimentConfig(angular_ratio=1, target_dofs=60, n_ev=5, mu=1.0)
        rows = runner.run_spectrum_compare(config)
        labels = [row['variant'] for row in rows]
        assert labels == ['p=2,k=1,mu=1'] * 5 + ['p=2,k=0,mu=1'] * 5
        assert all(row['eigenvalue_h'] > 0 for row in rows)
        assert all(row['rel_error'] >= 0 for row in rows)


class TestConvergence:
    """Multi-level studies and rate targets."""

    @pytest.fixture
    def config(self):
        return ExperimentConfig(schedule=(2, 3, 4), angular_ratio=1, mode=(0, 1), mu=1.0)

    def test_rates_estimated(self, runner, config):
        result = runner.run_convergence(config)
        assert [level.J1 for level in result.levels] == [2, 3, 4]
        assert set(result.rates) == {'h1', 'l2', 'eigenvalue'}
        assert len([r for r in result.reports if (r.k, r.m) == (0, 1)]) == 3
        assert result.missed == {}

    def test_parallel_levels_match_serial(self, runner, config):
        serial = runner.run_convergence(config)
        parallel = ExperimentRunner(ParallelRunner(3)).run_convergence(config)
        for a, b in zip(serial.reports, parallel.reports):
            assert a.eigenvalue_h == pytest.approx(b.eigenvalue_h, rel=1e-12)

    def test_missed_target(self, runner, config):
        result = runner.run_convergence(config.with_overrides(rate_targets=(('h1', 100.0),)))
        assert 'h1' in result.missed
        with pytest.raises(RateTargetMissed):
            runner.check_rate_targets(result)

    def test_needs_mode(self, runner, config):
        with pytest.raises(ConfigError):
            runner.run_convergence(replace(config, mode=None))

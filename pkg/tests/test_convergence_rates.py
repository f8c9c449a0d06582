"""Convergence studies on the cracked disk; run with ``pytest -m slow``."""

import math

import pandas as pd
import pytest

from config.experiment import ExperimentConfig
from services.experiment_runner import ExperimentRunner
from services.parallel_runner import ParallelRunner

pytestmark = pytest.mark.slow


@pytest.fixture(scope='module')
def runner():
    return ExperimentRunner(ParallelRunner(2))


def study(runner, mode=(1, 1), degree=2, **overrides):
    settings = dict(omega=2 * math.pi, degree=degree, schedule=(4, 8, 16), angular_ratio=2, mode=mode)
    settings.update(overrides)
    return runner.run_convergence(ExperimentConfig(**settings).validate())


def slopes(result):
    return tuple(result.rates[name].slope for name in ('h1', 'l2', 'eigenvalue'))


def finest_report(result, mode):
    return [r for r in result.levels[-1].reports if (r.k, r.m) == mode][0]


class TestGradedConvergence:
    """Radial grading restores the optimal rate for the crack-tip mode."""

    def test_uniform_mesh_limited_by_singularity(self, runner):
        result = study(runner, mu=1.0, schedule=(8, 16, 32, 64), angular_ratio=4)
        h1, l2, eigenvalue = slopes(result)
        assert h1 == pytest.approx(0.5, rel=0.15)
        assert eigenvalue == pytest.approx(1.0, rel=0.15)
        # best approximation of r^(1/2) in L2; the polar tensor discretization
        # separates into radial problems without pollution from the dual problem
        assert l2 == pytest.approx(1.5, rel=0.15)

    @pytest.mark.parametrize('degree', [2, 3])
    def test_graded_mesh_recovers_degree(self, runner, degree):
        graded = study(runner, degree=degree, mu='auto')
        uniform = study(runner, degree=degree, mu=1.0)
        assert graded.rates['h1'].slope > 0.7 * degree
        assert graded.rates['h1'].slope > uniform.rates['h1'].slope + 0.8
        assert graded.rates['eigenvalue'].slope > 1.4 * degree


class TestSmoothConvergence:
    """A smooth mode converges optimally without grading."""

    def test_uniform_rate(self, runner):
        result = study(runner, mode=(2, 1), mu=1.0)
        assert result.rates['h1'].slope == pytest.approx(2.0, rel=0.2)
        assert result.rates['eigenvalue'].slope == pytest.approx(4.0, rel=0.2)

    def test_grading_costs_accuracy(self, runner):
        uniform = finest_report(study(runner, mode=(2, 1), mu=1.0), (2, 1))
        graded = finest_report(study(runner, mode=(2, 1), mu=0.45), (2, 1))
        assert uniform.h1_error < graded.h1_error
        assert uniform.l2_error < graded.l2_error
        assert uniform.abs_error < graded.abs_error


class TestHierarchicalConvergence:
    """Ring-doubling B-spline spaces with n_arc cells on the innermost ring."""

    def hierarchical(self, runner, **overrides):
        settings = dict(mesh='hierarchical', angular_ratio=1, schedule=(4, 8, 16, 32))
        settings.update(overrides)
        return study(runner, **settings)

    def test_graded_singular_mode_is_optimal(self, runner):
        result = self.hierarchical(runner, mode=(1, 1), mu='auto')
        for slope, expected in zip(slopes(result), (2, 3, 4)):
            assert slope == pytest.approx(expected, rel=0.2)

    def test_uniform_smooth_mode_degrades(self, runner):
        result = self.hierarchical(runner, mode=(2, 1), degree=3, mu=1.0, schedule=(8, 16, 32, 64))
        for slope, expected in zip(slopes(result), (1, 2, 2)):
            assert slope == pytest.approx(expected, rel=0.2)

    def test_grading_restores_smooth_mode(self, runner):
        result = self.hierarchical(runner, mode=(2, 1), mu=0.45)
        for slope, expected in zip(slopes(result), (2, 3, 4)):
            assert slope == pytest.approx(expected, rel=0.2)

    def test_levels_follow_angular_refinement(self, runner):
        result = self.hierarchical(runner, mode=(1, 1), mu='auto')
        assert [level.levels for level in result.levels] == [2, 3, 4, 5]
        assert [level.J2 for level in result.levels] == [16, 32, 64, 128]
        h1 = [r.h1_error for r in result.reports if (r.k, r.m) == (1, 1)]
        assert h1 == sorted(h1, reverse=True)


class TestSpectrumComparison:
    """Smooth splines beat C0 splines at equal DOF counts."""

    @pytest.mark.parametrize('degree', [3, 5])
    @pytest.mark.parametrize('mu', [1.0, 'auto'])
    def test_smooth_splines_more_accurate(self, runner, degree, mu):
        config = ExperimentConfig(
            omega=2 * math.pi, degree=degree, angular_ratio=1, target_dofs=915, n_ev=0,
            variants=((degree, degree - 1, mu), (degree, 0, mu)),
        ).validate()
        df = pd.DataFrame(runner.run_spectrum_compare(config))
        smooth, c0 = df['variant'].unique()
        assert smooth.startswith(f"p={degree},k={degree - 1},")
        dofs = df.groupby('variant')['dofs'].first()
        assert dofs[smooth] == dofs[c0] == 915
        errors = df.groupby('variant')['rel_error'].mean()
        assert errors[smooth] < errors[c0]

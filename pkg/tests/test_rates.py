import math

import numpy as np
import pytest

from analysis.rates import (
    REPORT_COLUMNS,
    ErrorReport,
    estimate_rate,
    estimate_rates,
    mesh_size,
    missed_targets,
    rates_from_reports,
)


def make_report(J1, h1, eigenvalue_h=None, hierarchical=False, dofs=100):
    return ErrorReport(
        index=0, k=1, m=1, nu=0.5, regularity='H^1',
        eigenvalue=math.pi ** 2,
        eigenvalue_h=eigenvalue_h if eigenvalue_h is not None else math.pi ** 2 + h1 ** 2,
        l2_error=0.1 * h1, h1_error=h1, cosine=0.999,
        dofs=dofs, J1=J1, J2=4 * J1, mu=0.225, p=2, reg=1,
        hierarchical=hierarchical, levels=0, h=1.0 / J1,
    )


class TestErrorReport:
    """Derived eigenvalue errors and row layout."""

    def test_errors(self):
        report = make_report(4, 0.5)
        assert report.abs_error == pytest.approx(0.25)
        assert report.rel_error == pytest.approx(0.25 / math.pi ** 2)
        assert report.upper_bound_ok

    def test_eigenvalue_below_exact(self):
        assert not make_report(4, 0.5, eigenvalue_h=math.pi ** 2 - 1e-3).upper_bound_ok

    def test_row_columns(self):
        assert list(make_report(4, 0.5).to_row()) == REPORT_COLUMNS

    def test_positive_eigenvalue_required(self):
        with pytest.raises(ValueError):
            ErrorReport(0, 0, 1, 0.0, 'smooth', 0.0, 1.0, 0, 0, 1, 10, 1, 4, 1.0, 2, 1, False, 0, 1.0)

    def test_mesh_size(self):
        assert mesh_size(make_report(8, 0.1)) == 0.125
        assert mesh_size(make_report(8, 0.1, hierarchical=True, dofs=400)) == pytest.approx(0.05)


class TestRateEstimate:
    """Least-squares slopes over the last levels."""

    def test_exact_power_law(self):
        h = 1.0 / np.array([4, 8, 16, 32])
        estimate = estimate_rate(h, 3.0 * h ** 2)
        assert estimate.slope == pytest.approx(2.0)
        assert estimate.monotone
        assert estimate.window == 3

    def test_only_tail_counts(self):
        h = 1.0 / np.array([4, 8, 16, 32, 64])
        errors = np.concatenate([[1.0, 1.0], 0.1 * h[2:] ** 0.5])
        assert estimate_rate(h, errors).slope == pytest.approx(0.5)

    def test_non_monotone_flagged(self):
        estimate = estimate_rate([0.5, 0.25, 0.125], [1.0, 2.0, 0.5])
        assert not estimate.monotone
        assert np.isfinite(estimate.slope)

    def test_zero_error_gives_nan(self):
        assert math.isnan(estimate_rate([0.5, 0.25, 0.125], [1.0, 0.5, 0.0]).slope)

    def test_too_few_levels(self):
        with pytest.raises(ValueError):
            estimate_rate([0.5, 0.25], [1.0, 0.5])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            estimate_rate([0.5, 0.25, 0.125], [1.0, 0.5])

    def test_several_quantities(self):
        h = np.array([0.5, 0.25, 0.125])
        rates = estimate_rates(h, {'a': h, 'b': h ** 3})
        assert rates['a'].slope == pytest.approx(1.0)
        assert rates['b'].slope == pytest.approx(3.0)

    def test_rates_from_reports(self):
        reports = [make_report(J1, 1.0 / J1) for J1 in (4, 8, 16)]
        rates = rates_from_reports(reports)
        assert rates['h1'].slope == pytest.approx(1.0)
        assert rates['l2'].slope == pytest.approx(1.0)
        assert rates['eigenvalue'].slope == pytest.approx(2.0)


class TestMissedTargets:
    """Comparison of slopes against declared targets."""

    def test_within_tolerance(self):
        h = np.array([0.5, 0.25, 0.125])
        rates = estimate_rates(h, {'h1': h ** 1.9})
        assert missed_targets(rates, {'h1': 2.0}, 0.1) == {}

    def test_missed(self):
        h = np.array([0.5, 0.25, 0.125])
        rates = estimate_rates(h, {'h1': h ** 0.5})
        missed = missed_targets(rates, {'h1': 2.0}, 0.1)
        assert missed['h1'] == pytest.approx(0.5)

    def test_missing_quantity(self):
        missed = missed_targets({}, {'l2': 3.0}, 0.1)
        assert math.isnan(missed['l2'])

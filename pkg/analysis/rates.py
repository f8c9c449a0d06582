"""Error reports and convergence-rate estimates."""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

RATE_WINDOW = 3
UPPER_BOUND_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ErrorReport:
    """Errors of one discrete eigenpair against its matched exact pair.

    ``l2_error``/``h1_error`` are NaN when only eigenvalues are compared.
    """

    index: int
    k: int
    m: int
    nu: float
    regularity: str
    eigenvalue: float
    eigenvalue_h: float
    l2_error: float
    h1_error: float
    cosine: float
    dofs: int
    J1: int
    J2: int
    mu: float
    p: int
    reg: int
    hierarchical: bool
    levels: int
    h: float

    def __post_init__(self):
        if not self.eigenvalue > 0:
            raise ValueError(f"Exact eigenvalue must be positive, got {self.eigenvalue}")

    @property
    def abs_error(self) -> float:
        return abs(self.eigenvalue - self.eigenvalue_h)

    @property
    def rel_error(self) -> float:
        return self.abs_error / self.eigenvalue

    @property
    def upper_bound_ok(self) -> bool:
        return self.eigenvalue_h >= self.eigenvalue - UPPER_BOUND_TOLERANCE * self.eigenvalue

    def to_row(self) -> Dict:
        row = asdict(self)
        row['abs_error'] = self.abs_error
        row['rel_error'] = self.rel_error
        row['upper_bound_ok'] = self.upper_bound_ok
        return {column: row[column] for column in REPORT_COLUMNS}


REPORT_COLUMNS = [
    'index', 'k', 'm', 'nu', 'regularity',
    'eigenvalue', 'eigenvalue_h', 'abs_error', 'rel_error', 'upper_bound_ok',
    'l2_error', 'h1_error', 'cosine',
    'dofs', 'J1', 'J2', 'mu', 'p', 'reg', 'hierarchical', 'levels', 'h',
]


@dataclass(frozen=True)
class RateEstimate:
    """Least-squares slope of log(error) against log(h) over the last levels."""

    slope: float
    monotone: bool
    window: int


def mesh_size(report: ErrorReport) -> float:
    """h = 1/J1 for tensor meshes, DOF^(-1/2) for hierarchical ones."""
    if report.hierarchical:
        return float(report.dofs) ** -0.5
    return 1.0 / report.J1


def estimate_rate(h: Sequence[float], errors: Sequence[float], window: int = RATE_WINDOW) -> RateEstimate:
    """Slope of log(error) vs log(h) over the last ``window`` levels.

    A non-monotone error sequence is logged, not rejected.

    Raises:
        ValueError: With fewer than ``window`` levels or mismatched lengths
    """
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if h.size != errors.size:
        raise ValueError(f"Got {h.size} mesh sizes for {errors.size} errors")
    if h.size < window:
        raise ValueError(f"Need at least {window} refinement levels, got {h.size}")

    monotone = bool(np.all(np.diff(errors) <= 0))
    if not monotone:
        logger.warning(f"Non-monotone error sequence {errors.tolist()}")

    tail_h, tail_e = h[-window:], errors[-window:]
    if np.any(tail_e <= 0) or not np.all(np.isfinite(tail_e)):
        logger.warning(f"Cannot take logarithms of errors {tail_e.tolist()}")
        return RateEstimate(float('nan'), monotone, window)

    slope = np.polyfit(np.log(tail_h), np.log(tail_e), 1)[0]
    return RateEstimate(float(slope), monotone, window)


def estimate_rates(
    h: Sequence[float],
    errors: Mapping[str, Sequence[float]],
    window: int = RATE_WINDOW,
) -> Dict[str, RateEstimate]:
    """Rates of several error quantities recorded on the same levels."""
    return {name: estimate_rate(h, values, window) for name, values in errors.items()}


def rates_from_reports(reports: Sequence[ErrorReport], window: int = RATE_WINDOW) -> Dict[str, RateEstimate]:
    """H1_h, L2_h and eigenvalue rates of one mode across levels."""
    h = [mesh_size(r) for r in reports]
    return estimate_rates(h, {
        'h1': [r.h1_error for r in reports],
        'l2': [r.l2_error for r in reports],
        'eigenvalue': [r.abs_error for r in reports],
    }, window)


def missed_targets(
    rates: Mapping[str, RateEstimate],
    targets: Mapping[str, float],
    tolerance: float,
) -> Dict[str, float]:
    """Quantities whose slope deviates from its target by more than tolerance * target."""
    missed = {}
    for name, target in targets.items():
        estimate: Optional[RateEstimate] = rates.get(name)
        if estimate is None or not np.isfinite(estimate.slope) \
                or abs(estimate.slope - target) > tolerance * abs(target):
            missed[name] = estimate.slope if estimate is not None else float('nan')
    return missed

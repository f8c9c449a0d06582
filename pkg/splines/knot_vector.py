"""Open univariate knot vectors on [0, 1]."""

import logging
from typing import Callable, List, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

# Knots closer than this are treated as one breakpoint.
KNOT_TOLERANCE = 1e-12

MultiplicityRule = Union[int, Sequence[int], Callable[[int], int]]


class KnotVector:
    """A p-open knot vector with values in [0, 1].

    The first and last knot have multiplicity exactly p+1; interior
    breakpoints have multiplicity between 1 and p+1. Instances are
    immutable: the knot array is read-only.
    """

    def __init__(self, degree: int, knots: Sequence[float]):
        """Validate and store a knot vector.

        Args:
            degree: Polynomial degree p >= 0
            knots: Nondecreasing knot values

        Raises:
            ValueError: If the knots do not form a p-open vector on [0, 1]
        """
        if degree < 0:
            raise ValueError(f"Degree must be nonnegative, got {degree}")

        knots = np.asarray(knots, dtype=float).ravel()
        if knots.size < 2 * (degree + 1):
            raise ValueError(
                f"A degree-{degree} open knot vector needs at least "
                f"{2 * (degree + 1)} knots, got {knots.size}"
            )
        if np.any(np.diff(knots) < 0):
            raise ValueError("Knots must be nondecreasing")
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValueError(
                f"Knot vector must span [0, 1], got [{knots[0]}, {knots[-1]}]"
            )

        self._degree = int(degree)
        self._knots = knots.copy()
        self._knots.setflags(write=False)

        breakpoints, multiplicities = self._group_knots()
        if multiplicities[0] != degree + 1 or multiplicities[-1] != degree + 1:
            raise ValueError(
                f"End knots must have multiplicity {degree + 1}, got "
                f"{multiplicities[0]} and {multiplicities[-1]}"
            )
        if np.any(multiplicities[1:-1] > degree + 1):
            raise ValueError(
                f"Interior multiplicity exceeds p+1 = {degree + 1}"
            )

        self._breakpoints = breakpoints
        self._multiplicities = multiplicities
        self._breakpoints.setflags(write=False)
        self._multiplicities.setflags(write=False)

    def _group_knots(self):
        """Collapse coincident knots into breakpoints with multiplicities."""
        breakpoints = [self._knots[0]]
        multiplicities = [1]
        for value in self._knots[1:]:
            if value - breakpoints[-1] <= KNOT_TOLERANCE:
                multiplicities[-1] += 1
            else:
                breakpoints.append(value)
                multiplicities.append(1)
        return np.array(breakpoints), np.array(multiplicities, dtype=int)

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def knots(self) -> np.ndarray:
        return self._knots

    @property
    def breakpoints(self) -> np.ndarray:
        """Knot values without repetition (Z)."""
        return self._breakpoints

    @property
    def multiplicities(self) -> np.ndarray:
        """Multiplicity m_j of every breakpoint."""
        return self._multiplicities

    @property
    def regularities(self) -> np.ndarray:
        """Continuity k_j = p - m_j at every breakpoint."""
        return self._degree - self._multiplicities

    @property
    def num_basis(self) -> int:
        """Dimension n = |knots| - p - 1 of the spline space."""
        return self._knots.size - self._degree - 1

    @property
    def num_elements(self) -> int:
        return self._breakpoints.size - 1

    def greville(self) -> np.ndarray:
        """Greville abscissae, one per basis function."""
        p = self._degree
        if p == 0:
            return 0.5 * (self._knots[:-1] + self._knots[1:])
        n = self.num_basis
        return np.array([self._knots[i + 1:i + p + 1].mean() for i in range(n)])

    def support(self, index: int):
        """Support interval [xi_i, xi_{i+p+1}] of basis function ``index``."""
        return self._knots[index], self._knots[index + self._degree + 1]

    def to_list(self) -> List[str]:
        """Knots as decimal strings with 17 significant digits."""
        return [format(float(k), '.17g') for k in self._knots]

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnotVector):
            return NotImplemented
        return (
            self._degree == other._degree
            and self._knots.shape == other._knots.shape
            and bool(np.all(np.abs(self._knots - other._knots) <= KNOT_TOLERANCE))
        )

    def __hash__(self) -> int:
        return hash((self._degree, self._knots.round(12).tobytes()))

    def __repr__(self) -> str:
        return f"KnotVector(degree={self._degree}, knots={self._knots.tolist()})"


def knots_from_breakpoints(
    degree: int,
    breakpoints: Sequence[float],
    interior_mults: Sequence[int],
) -> KnotVector:
    """Build an open knot vector from breakpoints and interior multiplicities.

    Args:
        degree: Polynomial degree p
        breakpoints: Increasing values starting at 0 and ending at 1
        interior_mults: Multiplicity for each interior breakpoint

    Returns:
        KnotVector with end multiplicities p+1
    """
    breakpoints = np.asarray(breakpoints, dtype=float)
    if len(interior_mults) != breakpoints.size - 2:
        raise ValueError(
            f"Expected {breakpoints.size - 2} interior multiplicities, "
            f"got {len(interior_mults)}"
        )
    for mult in interior_mults:
        if mult < 1 or mult > degree + 1:
            raise ValueError(
                f"Interior multiplicity {mult} outside [1, {degree + 1}]"
            )

    knots = [breakpoints[0]] * (degree + 1)
    for value, mult in zip(breakpoints[1:-1], interior_mults):
        knots.extend([value] * int(mult))
    knots.extend([breakpoints[-1]] * (degree + 1))
    return KnotVector(degree, knots)


def _resolve_multiplicities(rule: MultiplicityRule, count: int) -> List[int]:
    """Expand a multiplicity rule into one value per interior breakpoint.

    ``rule`` may be a single int, a sequence, or a callable receiving the
    1-based breakpoint index j (breakpoint j/J).
    """
    if callable(rule):
        return [int(rule(j)) for j in range(1, count + 1)]
    if np.isscalar(rule):
        return [int(rule)] * count
    mults = [int(m) for m in rule]
    if len(mults) != count:
        raise ValueError(f"Expected {count} multiplicities, got {len(mults)}")
    return mults


def make_uniform(degree: int, J: int, interior_mults: MultiplicityRule = 1) -> KnotVector:
    """Uniform open knot vector with breakpoints {0, 1/J, ..., 1}.

    Args:
        degree: Polynomial degree p
        J: Number of subdivisions (J >= 1)
        interior_mults: Multiplicity rule for the J-1 interior breakpoints

    Raises:
        ValueError: If J < 1 or a multiplicity exceeds p+1
    """
    if J < 1:
        raise ValueError(f"Subdivision count must be >= 1, got {J}")
    breakpoints = np.arange(J + 1) / J
    mults = _resolve_multiplicities(interior_mults, J - 1)
    return knots_from_breakpoints(degree, breakpoints, mults)


def graded_breakpoints(J: int, mu: float) -> np.ndarray:
    """Breakpoints ((j-1)/J)^(1/mu), j = 1..J+1, graded toward zero."""
    if J < 1:
        raise ValueError(f"Subdivision count must be >= 1, got {J}")
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"Grading parameter must lie in (0, 1], got {mu}")
    breakpoints = (np.arange(J + 1) / J) ** (1.0 / mu)
    breakpoints[-1] = 1.0
    return breakpoints


def make_graded(
    degree: int,
    J: int,
    mu: float,
    interior_mults: MultiplicityRule = 1,
) -> KnotVector:
    """Open knot vector graded toward 0 with parameter mu.

    mu = 1 reproduces ``make_uniform`` element-wise.
    """
    breakpoints = graded_breakpoints(J, mu)
    mults = _resolve_multiplicities(interior_mults, J - 1)
    logger.debug(f"Graded knot vector: p={degree}, J={J}, mu={mu}")
    return knots_from_breakpoints(degree, breakpoints, mults)

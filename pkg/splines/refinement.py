"""Knot insertion, degree elevation and k-refinement of open B-spline spaces.

Every operation returns the refined knot vector together with a dense
transfer matrix T of shape (n_new, n_old): if ``c`` holds coefficients in the
old basis, ``T @ c`` holds coefficients of the same spline in the new basis.
"""

import logging
from typing import Sequence, Tuple

import numpy as np
from scipy import linalg

from splines.basis import collocation_matrix
from splines.knot_vector import KNOT_TOLERANCE, KnotVector

logger = logging.getLogger(__name__)


def _snap(knots: np.ndarray, value: float) -> float:
    """Return an existing knot within tolerance of ``value``, else ``value``."""
    nearest = knots[np.argmin(np.abs(knots - value))]
    if abs(nearest - value) <= KNOT_TOLERANCE:
        return float(nearest)
    return float(value)


def _insert_one(knots: np.ndarray, p: int, t: float, transfer: np.ndarray):
    """Insert a single knot (Boehm) and update the accumulated transfer rows."""
    n = knots.size - p - 1
    span = int(np.searchsorted(knots, t, side='right') - 1)
    span = min(max(span, p), n - 1)

    alpha = np.zeros(n + 1)
    alpha[:span - p + 1] = 1.0
    for i in range(span - p + 1, span + 1):
        alpha[i] = (t - knots[i]) / (knots[i + p] - knots[i])

    new_transfer = np.zeros((n + 1, transfer.shape[1]))
    new_transfer[:n] += alpha[:n, None] * transfer
    new_transfer[1:] += (1.0 - alpha[1:, None]) * transfer

    new_knots = np.insert(knots, span + 1, t)
    return new_knots, new_transfer


def insert_knots(kv: KnotVector, new_knots: Sequence[float]) -> Tuple[KnotVector, np.ndarray]:
    """Insert knots into ``kv`` without changing the spline space's functions.

    Args:
        kv: Knot vector to refine
        new_knots: Values strictly inside (0, 1); repeated values raise the
            multiplicity accordingly

    Returns:
        Tuple (refined knot vector, transfer matrix of shape (n_new, n_old))

    Raises:
        ValueError: If a knot lies outside (0, 1) or a multiplicity would
            exceed p+1
    """
    p = kv.degree
    knots = np.array(kv.knots, dtype=float)
    transfer = np.eye(kv.num_basis)

    values = np.sort(np.asarray(new_knots, dtype=float).ravel())
    if values.size == 0:
        return kv, transfer
    if values[0] <= 0.0 or values[-1] >= 1.0:
        raise ValueError("Inserted knots must lie strictly inside (0, 1)")

    for value in values:
        t = _snap(knots, value)
        mult = int(np.sum(np.abs(knots - t) <= KNOT_TOLERANCE))
        if mult + 1 > p + 1:
            raise ValueError(
                f"Inserting {t} would raise its multiplicity above p+1 = {p + 1}"
            )
        knots, transfer = _insert_one(knots, p, t, transfer)

    logger.debug(f"Inserted {values.size} knots: n {kv.num_basis} -> {transfer.shape[0]}")
    return KnotVector(p, knots), transfer


def elevated_knot_vector(kv: KnotVector, t: int) -> KnotVector:
    """Knot vector of degree p+t with every multiplicity raised by t."""
    knots = np.repeat(kv.breakpoints, kv.multiplicities + t)
    return KnotVector(kv.degree + t, knots)


def elevation_matrix(kv: KnotVector, t: int) -> Tuple[KnotVector, np.ndarray]:
    """Degree elevation by ``t`` as a transfer matrix.

    The elevated space contains the original one, so interpolation at the
    Greville abscissae of the elevated vector reproduces every old basis
    function exactly.

    Raises:
        ValueError: If t < 0 or an interior knot has multiplicity p+1
    """
    if t < 0:
        raise ValueError(f"Elevation amount must be >= 0, got {t}")
    if np.any(kv.multiplicities[1:-1] > kv.degree):
        # Greville sites coincide there and the collocation matrix is singular
        raise ValueError(
            f"Cannot elevate across an interior knot of multiplicity {kv.degree + 1}"
        )
    if t == 0:
        return kv, np.eye(kv.num_basis)

    elevated = elevated_knot_vector(kv, t)
    sites = elevated.greville()
    transfer = linalg.solve(
        collocation_matrix(elevated, sites),
        collocation_matrix(kv, sites),
    )
    # Round-off of the solve only; exact entries are rational in the knots.
    transfer[np.abs(transfer) < 1e-15] = 0.0
    return elevated, transfer


def elevate_degree(kv: KnotVector, coefficients, t: int) -> Tuple[KnotVector, np.ndarray]:
    """Elevate the degree of a spline given by coefficients over ``kv``.

    Args:
        kv: Knot vector of the spline
        coefficients: Array of shape (n,) or (n, d)
        t: Elevation amount

    Returns:
        Tuple (elevated knot vector, coefficients in the elevated basis)
    """
    elevated, transfer = elevation_matrix(kv, t)
    return elevated, transfer @ np.asarray(coefficients, dtype=float)


def k_refine(
    kv: KnotVector,
    t: int,
    new_knots: Sequence[float],
) -> Tuple[KnotVector, np.ndarray]:
    """Elevate by ``t`` and then insert ``new_knots``.

    Elevation comes first so original breakpoints keep their regularity
    while inserted knots get the regularity implied by their multiplicity.
    """
    elevated, elevation = elevation_matrix(kv, t)
    refined, insertion = insert_knots(elevated, new_knots)
    return refined, insertion @ elevation

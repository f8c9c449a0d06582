"""Cox-de Boor evaluation of B-spline basis functions and derivatives."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from splines.knot_vector import KnotVector


@dataclass(frozen=True)
class BasisEvaluation:
    """The p+1 possibly nonzero basis functions at one parameter value.

    ``derivatives[d, a]`` is the d-th derivative of basis function
    ``first_index + a``; ``derivatives[0]`` holds the values.
    """

    span: int
    first_index: int
    derivatives: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return self.derivatives[0]

    @property
    def indices(self) -> np.ndarray:
        return self.first_index + np.arange(self.derivatives.shape[1])


def find_spans(kv: KnotVector, points: np.ndarray) -> np.ndarray:
    """Knot span index of every point.

    Interior breakpoints resolve to the span on their right; the point 1
    resolves to the last nonempty span (left limit).
    """
    p = kv.degree
    spans = np.searchsorted(kv.knots, points, side='right') - 1
    return np.clip(spans, p, kv.num_basis - 1)


def _check_points(points: np.ndarray) -> None:
    if np.any(points < 0.0) or np.any(points > 1.0) or np.any(np.isnan(points)):
        bad = points[(points < 0.0) | (points > 1.0) | np.isnan(points)]
        raise ValueError(f"Parameter values must lie in [0, 1], got {bad[:5]}")


def _all_derivatives(
    knots: np.ndarray,
    p: int,
    x: np.ndarray,
    spans: np.ndarray,
    nders: int,
) -> np.ndarray:
    """Vectorized basis values and derivatives, shape (nders+1, p+1, N).

    Algorithm A2.3 of Piegl & Tiller applied to all points at once.
    """
    npts = x.size
    ndu = np.zeros((p + 1, p + 1, npts))
    ndu[0, 0] = 1.0
    left = np.zeros((p + 1, npts))
    right = np.zeros((p + 1, npts))

    for j in range(1, p + 1):
        left[j] = x - knots[spans + 1 - j]
        right[j] = knots[spans + j] - x
        saved = np.zeros(npts)
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    ders = np.zeros((nders + 1, p + 1, npts))
    ders[0] = ndu[:, p]
    top = min(nders, p)
    a = np.zeros((2, p + 1, npts))

    for r in range(p + 1):
        a[:] = 0.0
        a[0, 0] = 1.0
        s1, s2 = 0, 1
        for k in range(1, top + 1):
            d = np.zeros(npts)
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d += a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            s1, s2 = s2, s1

    factor = p
    for k in range(1, top + 1):
        ders[k] *= factor
        factor *= p - k
    return ders


def eval_basis_batch(
    kv: KnotVector,
    points,
    max_deriv: int = 0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Evaluate the active basis functions at many points.

    Args:
        kv: Knot vector
        points: Parameter values in [0, 1]
        max_deriv: Highest derivative order requested

    Returns:
        Tuple (first_indices, ders) where ``first_indices[i]`` is the index of
        the first active function at point i and ``ders[i, d, a]`` the d-th
        derivative of function ``first_indices[i] + a``.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float)).ravel()
    _check_points(points)
    if max_deriv < 0:
        raise ValueError(f"Derivative order must be >= 0, got {max_deriv}")

    spans = find_spans(kv, points)
    ders = _all_derivatives(kv.knots, kv.degree, points, spans, max_deriv)
    return spans - kv.degree, np.transpose(ders, (2, 0, 1))


def eval_basis(kv: KnotVector, zeta: float, max_deriv: int = 0) -> BasisEvaluation:
    """Evaluate the p+1 active basis functions and derivatives at ``zeta``.

    Raises:
        ValueError: If zeta lies outside [0, 1]
    """
    first, ders = eval_basis_batch(kv, [zeta], max_deriv)
    return BasisEvaluation(
        span=int(first[0]) + kv.degree,
        first_index=int(first[0]),
        derivatives=ders[0],
    )


def collocation_matrix(kv: KnotVector, points, deriv: int = 0) -> np.ndarray:
    """Dense matrix C[i, j] = d^deriv B_j(points[i])."""
    points = np.atleast_1d(np.asarray(points, dtype=float)).ravel()
    first, ders = eval_basis_batch(kv, points, deriv)
    matrix = np.zeros((points.size, kv.num_basis))
    rows = np.repeat(np.arange(points.size), kv.degree + 1)
    cols = (first[:, None] + np.arange(kv.degree + 1)).ravel()
    matrix[rows, cols] = ders[:, deriv, :].ravel()
    return matrix


def evaluate_spline(kv: KnotVector, coefficients, points, deriv: int = 0) -> np.ndarray:
    """Evaluate sum_i c_i B_i^(deriv) at the given points.

    ``coefficients`` has shape (n,) or (n, d).
    """
    coefficients = np.asarray(coefficients, dtype=float)
    return collocation_matrix(kv, points, deriv) @ coefficients

"""Rational (NURBS) bases on the unit square.

Tensor basis functions are numbered lexicographically with the first
direction running fastest: ``index = i1 + n1 * i2``.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from splines.basis import eval_basis_batch
from splines.knot_vector import KnotVector

logger = logging.getLogger(__name__)


class WeightVector:
    """Strictly positive NURBS weights, one per tensor basis function."""

    def __init__(self, weights: Sequence[float]):
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size == 0:
            raise ValueError("Weight vector must not be empty")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0.0):
            raise ValueError("NURBS weights must be finite and strictly positive")
        self._weights = weights
        self._weights.setflags(write=False)

    @property
    def values(self) -> np.ndarray:
        return self._weights

    def __len__(self) -> int:
        return self._weights.size

    def __repr__(self) -> str:
        return f"WeightVector(n={self._weights.size}, min={self._weights.min():.6g})"


@dataclass(frozen=True)
class TensorBasisEvaluation:
    """Active rational functions at N parametric points.

    Attributes:
        indices: (N, n_loc) global function indices
        values: (N, n_loc) function values
        gradients: (N, n_loc, 2) parametric gradients
        weight: (N,) weight function W
        weight_gradient: (N, 2) parametric gradient of W
    """

    indices: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    weight: np.ndarray
    weight_gradient: np.ndarray


class TensorNurbsBasis:
    """Tensor product of two open B-spline bases with NURBS weights."""

    def __init__(self, kv1: KnotVector, kv2: KnotVector, weights: WeightVector = None):
        self.kv1 = kv1
        self.kv2 = kv2
        if weights is None:
            weights = WeightVector(np.ones(kv1.num_basis * kv2.num_basis))
        if len(weights) != kv1.num_basis * kv2.num_basis:
            raise ValueError(
                f"Expected {kv1.num_basis * kv2.num_basis} weights, got {len(weights)}"
            )
        self.weights = weights
        self._weight_grid = weights.values.reshape(kv2.num_basis, kv1.num_basis).T

    @property
    def shape(self) -> Tuple[int, int]:
        return self.kv1.num_basis, self.kv2.num_basis

    @property
    def size(self) -> int:
        return self.kv1.num_basis * self.kv2.num_basis

    @property
    def degrees(self) -> Tuple[int, int]:
        return self.kv1.degree, self.kv2.degree

    @property
    def local_size(self) -> int:
        return (self.kv1.degree + 1) * (self.kv2.degree + 1)

    def unravel(self, indices) -> Tuple[np.ndarray, np.ndarray]:
        """Split global indices into (i1, i2)."""
        indices = np.asarray(indices)
        n1 = self.kv1.num_basis
        return indices % n1, indices // n1

    def numerators(self, z1, z2):
        """Weighted B-splines w_i B_i and their parametric gradients.

        Returns:
            Tuple (indices, values, gradients) with shapes (N, n_loc),
            (N, n_loc) and (N, n_loc, 2)
        """
        z1 = np.atleast_1d(np.asarray(z1, dtype=float)).ravel()
        z2 = np.atleast_1d(np.asarray(z2, dtype=float)).ravel()
        if z1.shape != z2.shape:
            raise ValueError("Coordinate arrays must have the same length")

        p1, p2 = self.degrees
        first1, d1 = eval_basis_batch(self.kv1, z1, 1)
        first2, d2 = eval_basis_batch(self.kv2, z2, 1)

        rows = first1[:, None] + np.arange(p1 + 1)
        cols = first2[:, None] + np.arange(p2 + 1)
        local_w = self._weight_grid[rows[:, :, None], cols[:, None, :]]

        values = local_w * d1[:, 0, :, None] * d2[:, 0, None, :]
        grad1 = local_w * d1[:, 1, :, None] * d2[:, 0, None, :]
        grad2 = local_w * d1[:, 0, :, None] * d2[:, 1, None, :]

        npts = z1.size
        n1 = self.kv1.num_basis
        # (N, p1+1, p2+1) -> (N, n_loc) with the first direction fastest
        order = (0, 2, 1)
        indices = (rows[:, :, None] + n1 * cols[:, None, :]).transpose(order).reshape(npts, -1)
        values = values.transpose(order).reshape(npts, -1)
        gradients = np.stack(
            [grad1.transpose(order).reshape(npts, -1), grad2.transpose(order).reshape(npts, -1)],
            axis=-1,
        )
        return indices, values, gradients

    def evaluate(self, z1, z2) -> TensorBasisEvaluation:
        """Rational basis functions N_i = w_i B_i / W with quotient-rule gradients."""
        indices, wb, grad_wb = self.numerators(z1, z2)
        return rationalize(indices, wb, grad_wb)


def rationalize(indices, wb, grad_wb, weight=None, weight_gradient=None) -> TensorBasisEvaluation:
    """Divide weighted B-splines by the weight function.

    When ``weight`` is omitted, W is the sum of the given numerators, which
    is exact for a complete tensor basis.
    """
    if weight is None:
        weight = wb.sum(axis=1)
        weight_gradient = grad_wb.sum(axis=1)
    values = wb / weight[:, None]
    gradients = (grad_wb - values[:, :, None] * weight_gradient[:, None, :]) / weight[:, None, None]
    return TensorBasisEvaluation(
        indices=indices,
        values=values,
        gradients=gradients,
        weight=weight,
        weight_gradient=weight_gradient,
    )


def eval_weight(basis: TensorNurbsBasis, zeta) -> Tuple[np.ndarray, np.ndarray]:
    """Weight function W and its parametric gradient at points ``zeta``.

    Args:
        basis: Tensor basis carrying the weights
        zeta: A point (2,) or an array of points (N, 2)

    Returns:
        Tuple (W, grad W) with shapes (N,) and (N, 2)
    """
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    _, wb, grad_wb = basis.numerators(zeta[:, 0], zeta[:, 1])
    return wb.sum(axis=1), grad_wb.sum(axis=1)


def eval_nurbs_2d(basis: TensorNurbsBasis, zeta) -> TensorBasisEvaluation:
    """Evaluate the (p1+1)(p2+1) active rational functions at ``zeta``.

    Args:
        basis: Tensor NURBS basis
        zeta: A point (2,) or an array of points (N, 2) in [0, 1]^2
    """
    zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
    return basis.evaluate(zeta[:, 0], zeta[:, 1])

"""Single-patch NURBS parameterization of the circular sector.

The sector of opening angle omega is the image of the unit square under

    F(z1, z2) = z1 * g(z2),

where g is a quadratic rational arc of the unit circle. The whole edge
z1 = 0 collapses onto the vertex, so the map is singular there.
"""

import logging
import math
from typing import Dict, Tuple

import numpy as np

from core.exceptions import SingularPointError
from splines.knot_vector import KnotVector, make_uniform
from splines.nurbs import TensorNurbsBasis, WeightVector, eval_nurbs_2d

logger = logging.getLogger(__name__)

# Largest opening of a single quadratic arc segment.
MAX_ARC_ANGLE = math.pi / 2


class NurbsPatch:
    """A planar map F = sum_i c_i N_i over a tensor NURBS basis."""

    def __init__(self, basis: TensorNurbsBasis, control_points):
        control_points = np.asarray(control_points, dtype=float)
        if control_points.shape != (basis.size, 2):
            raise ValueError(
                f"Expected control points of shape ({basis.size}, 2), "
                f"got {control_points.shape}"
            )
        self.basis = basis
        self.control_points = control_points
        self.control_points.setflags(write=False)

    @property
    def weights(self) -> np.ndarray:
        return self.basis.weights.values

    @property
    def weighted_control_points(self) -> np.ndarray:
        """Homogeneous form w_i * c_i of the control net."""
        return self.control_points * self.weights[:, None]

    def _check_regular(self, z1: np.ndarray, z2: np.ndarray) -> None:
        """Hook for subclasses with singular edges."""

    def map(self, z1, z2) -> np.ndarray:
        """Physical points F(z1, z2), shape (N, 2)."""
        ev = self.basis.evaluate(z1, z2)
        return np.einsum('na,nad->nd', ev.values, self.control_points[ev.indices])

    def jacobian(self, z1, z2) -> Tuple[np.ndarray, np.ndarray]:
        """Jacobian DF and its determinant.

        Returns:
            Tuple (jac, det) with jac[n, d, a] = dF_d / dz_a of shape (N, 2, 2)
            and det of shape (N,)

        Raises:
            SingularPointError: If a point lies on a singular edge
        """
        z1 = np.atleast_1d(np.asarray(z1, dtype=float)).ravel()
        z2 = np.atleast_1d(np.asarray(z2, dtype=float)).ravel()
        self._check_regular(z1, z2)
        ev = self.basis.evaluate(z1, z2)
        jac = np.einsum('nak,nad->ndk', ev.gradients, self.control_points[ev.indices])
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        return jac, det

    def eval_weight(self, z1, z2) -> Tuple[np.ndarray, np.ndarray]:
        """Weight function W and its parametric gradient."""
        zeta = np.column_stack([np.atleast_1d(z1), np.atleast_1d(z2)])
        ev = eval_nurbs_2d(self.basis, zeta)
        return ev.weight, ev.weight_gradient


class SectorGeometry(NurbsPatch):
    """Polar-like NURBS map of the unit-radius sector with angle omega.

    The angular direction is split into ``n_arc`` equal quadratic arcs joined
    with C0 continuity; the radial direction is linear with all inner control
    points at the origin.
    """

    def __init__(self, omega: float):
        if not 0.0 < omega <= 2.0 * math.pi:
            raise ValueError(f"Sector angle must lie in (0, 2*pi], got {omega}")

        self.omega = float(omega)
        self.n_arc = max(1, math.ceil(omega / MAX_ARC_ANGLE - 1e-12))
        self.arc_angle = self.omega / self.n_arc

        kv1 = KnotVector(1, [0.0, 0.0, 1.0, 1.0])
        kv2 = make_uniform(2, self.n_arc, interior_mults=2)

        half = 0.5 * self.arc_angle
        angles = half * np.arange(2 * self.n_arc + 1)
        radii = np.where(np.arange(angles.size) % 2 == 1, 1.0 / math.cos(half), 1.0)
        ring_weights = np.where(np.arange(angles.size) % 2 == 1, math.cos(half), 1.0)

        outer = np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
        # Snap exact zeros so legs on the axes stay on the axes.
        outer[np.abs(outer) < 1e-15] = 0.0

        control_points = np.zeros((2 * angles.size, 2))
        control_points[1::2] = outer
        weights = np.repeat(ring_weights, 2)

        basis = TensorNurbsBasis(kv1, kv2, WeightVector(weights))
        super().__init__(basis, control_points)
        logger.debug(
            f"Sector geometry: omega={self.omega:.6g}, {self.n_arc} arcs, "
            f"midpoint weight {math.cos(half):.6g}"
        )

    @property
    def kv1(self) -> KnotVector:
        return self.basis.kv1

    @property
    def kv2(self) -> KnotVector:
        return self.basis.kv2

    @property
    def area(self) -> float:
        return 0.5 * self.omega

    def _check_regular(self, z1: np.ndarray, z2: np.ndarray) -> None:
        if np.any(z1 <= 0.0):
            raise SingularPointError(
                "Jacobian requested on the singular edge z1 = 0"
            )

    def polar_angle(self, z2) -> np.ndarray:
        """Physical polar angle of F(1, z2), in [0, omega]."""
        z2 = np.atleast_1d(np.asarray(z2, dtype=float)).ravel()
        points = self.map(np.ones_like(z2), z2)
        arc = np.minimum(np.floor(z2 * self.n_arc), self.n_arc - 1)
        start = arc * self.arc_angle
        cos_s, sin_s = np.cos(start), np.sin(start)
        local = np.arctan2(
            cos_s * points[:, 1] - sin_s * points[:, 0],
            cos_s * points[:, 0] + sin_s * points[:, 1],
        )
        return start + local

    def to_dict(self) -> Dict:
        """Control net, weights and knot vectors for external tools."""
        n1, n2 = self.basis.shape
        return {
            'omega': self.omega,
            'n_arc': self.n_arc,
            'degrees': list(self.basis.degrees),
            'shape': [n1, n2],
            'knots_1': self.kv1.to_list(),
            'knots_2': self.kv2.to_list(),
            'control_points': self.control_points.tolist(),
            'weighted_control_points': self.weighted_control_points.tolist(),
            'weights': self.weights.tolist(),
        }


def build_sector(omega: float) -> SectorGeometry:
    """Build the sector parameterization for opening angle ``omega``.

    Raises:
        ValueError: If omega lies outside (0, 2*pi]
    """
    geo = SectorGeometry(omega)
    logger.info(f"Built sector geometry with omega={omega:.6g} ({geo.n_arc} arcs)")
    return geo


def unit_square() -> NurbsPatch:
    """Bilinear identity map of the unit square with unit weights."""
    kv = KnotVector(1, [0.0, 0.0, 1.0, 1.0])
    points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    return NurbsPatch(TensorNurbsBasis(kv, kv), points)

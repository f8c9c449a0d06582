"""Tensor-product NURBS spaces on the sector obtained by k-refinement."""

import logging
from typing import Dict, Tuple

import numpy as np

from geometry.bezier_mesh import BezierMesh, build_mesh
from geometry.sector import SectorGeometry
from splines.knot_vector import KnotVector, graded_breakpoints
from splines.nurbs import TensorBasisEvaluation, TensorNurbsBasis, WeightVector
from splines.refinement import k_refine

logger = logging.getLogger(__name__)


def check_degree_and_regularity(p: int, k: int) -> None:
    if p < 2:
        raise ValueError(f"Degree must be >= 2 to represent circular arcs, got {p}")
    if not 0 <= k <= p - 1:
        raise ValueError(f"Regularity must satisfy 0 <= k <= p-1, got k={k}, p={p}")


def refine_homogeneous(geo: SectorGeometry, T1: np.ndarray, T2: np.ndarray):
    """Carry the coarse control net through transfer matrices.

    Refinement acts on homogeneous coordinates (w*c, w), which keeps the
    weight function and the map unchanged.

    Returns:
        Tuple (weights, control_points) in lexicographic order
    """
    n1c, n2c = geo.basis.shape
    weights = geo.weights.reshape(n2c, n1c).T
    weighted = geo.weighted_control_points.reshape(n2c, n1c, 2).transpose(1, 0, 2)

    new_weights = T1 @ weights @ T2.T
    new_weighted = np.einsum('ia,abd,jb->ijd', T1, weighted, T2)
    points = new_weighted / new_weights[:, :, None]

    n1, n2 = new_weights.shape
    return (
        new_weights.T.reshape(n1 * n2),
        points.transpose(1, 0, 2).reshape(n1 * n2, 2),
    )


def radial_refinement(geo: SectorGeometry, p: int, k: int, J1: int, mu: float):
    """Elevate the linear radial direction to degree p and insert graded knots."""
    breaks = graded_breakpoints(J1, mu)
    new_knots = np.repeat(breaks[1:-1], p - k)
    return k_refine(geo.kv1, p - geo.kv1.degree, new_knots)


def angular_refinement(geo: SectorGeometry, p: int, k: int, J2: int):
    """Elevate the quadratic arcs to degree p and insert J2 uniform cells.

    Arc junctions keep multiplicity p (C0); new breakpoints get p-k.
    """
    breaks = np.arange(1, J2) / J2
    junctions = np.arange(1, geo.n_arc) / geo.n_arc
    is_junction = np.isclose(breaks[:, None], junctions[None, :], atol=1e-12).any(axis=1)
    new_knots = np.repeat(breaks[~is_junction], p - k)
    return k_refine(geo.kv2, p - geo.kv2.degree, new_knots)


class TensorSpace:
    """NURBS space N_p(Xi, W) pushed forward by the sector map.

    Basis functions are numbered ``i1 + n1 * i2``; functions with
    i1 = n1 - 1 are the only ones nonzero on the circular edge z1 = 1.
    """

    kind = 'tensor'

    def __init__(
        self,
        geometry: SectorGeometry,
        basis: TensorNurbsBasis,
        control_points: np.ndarray,
        mesh: BezierMesh,
        degree: int,
        regularity: int,
        mu: float,
    ):
        self.geometry = geometry
        self.basis = basis
        self.control_points = control_points
        self.mesh = mesh
        self.degree = degree
        self.regularity = regularity
        self.mu = mu

    @property
    def kv1(self) -> KnotVector:
        return self.basis.kv1

    @property
    def kv2(self) -> KnotVector:
        return self.basis.kv2

    @property
    def shape(self) -> Tuple[int, int]:
        return self.basis.shape

    @property
    def num_dofs(self) -> int:
        return self.basis.size

    @property
    def max_local_size(self) -> int:
        return self.basis.local_size

    @property
    def levels(self) -> int:
        return 0

    def dirichlet_mask(self) -> np.ndarray:
        """Boolean mask of the functions constrained on the circular edge."""
        n1, _ = self.shape
        i1, _ = self.basis.unravel(np.arange(self.num_dofs))
        return i1 == n1 - 1

    def evaluate(self, z1, z2) -> TensorBasisEvaluation:
        return self.basis.evaluate(z1, z2)

    def map(self, z1, z2) -> np.ndarray:
        """Geometry map evaluated through this space's control net."""
        ev = self.basis.evaluate(z1, z2)
        return np.einsum('na,nad->nd', ev.values, self.control_points[ev.indices])

    def summary(self) -> Dict:
        n1, n2 = self.shape
        return {
            'kind': self.kind,
            'degree': self.degree,
            'regularity': self.regularity,
            'mu': self.mu,
            'levels': self.levels,
            'n1': n1,
            'n2': n2,
            'dofs': self.num_dofs,
            'constrained': int(self.dirichlet_mask().sum()),
            'elements': self.mesh.num_elements,
        }


def build_tensor_space(
    geo: SectorGeometry,
    p: int,
    k: int,
    J1: int,
    J2: int,
    mu: float = 1.0,
) -> TensorSpace:
    """Build the k-refined tensor space of degree (p, p) on the sector.

    Args:
        geo: Coarse sector geometry
        p: Target degree in both directions (p >= 2)
        k: Regularity at inserted knots (k <= p-1)
        J1: Radial subdivisions (graded by mu)
        J2: Angular subdivisions, a multiple of geo.n_arc
        mu: Grading parameter in (0, 1]

    Raises:
        ValueError: On invalid degree, regularity, grading or subdivisions
    """
    check_degree_and_regularity(p, k)
    mesh = build_mesh(geo, J1, J2, mu)

    kv1, T1 = radial_refinement(geo, p, k, J1, mu)
    kv2, T2 = angular_refinement(geo, p, k, J2)
    weights, points = refine_homogeneous(geo, T1, T2)

    basis = TensorNurbsBasis(kv1, kv2, WeightVector(weights))
    space = TensorSpace(geo, basis, points, mesh, p, k, mu)
    logger.info(
        f"Built tensor space p={p}, k={k}, J1={J1}, J2={J2}, mu={mu:.6g}: "
        f"{space.shape[0]}x{space.shape[1]} = {space.num_dofs} DOFs"
    )
    return space


def geometry_space(geo: SectorGeometry) -> TensorSpace:
    """The coarse space the geometry itself is defined on."""
    mesh = build_mesh(geo, 1, geo.n_arc, 1.0)
    return TensorSpace(
        geo, geo.basis, np.array(geo.control_points), mesh,
        degree=geo.kv2.degree, regularity=0, mu=1.0,
    )


def dirichlet_mask(space) -> np.ndarray:
    """Constrained functions of a tensor or hierarchical space."""
    return space.dirichlet_mask()


def tensor_shape(geo: SectorGeometry, p: int, k: int, J1: int, J2: int) -> Tuple[int, int]:
    """(n1, n2) of build_tensor_space without building it."""
    check_degree_and_regularity(p, k)
    n1 = p + 1 + (J1 - 1) * (p - k)
    n2 = p + 1 + (geo.n_arc - 1) * p + (J2 - geo.n_arc) * (p - k)
    return n1, n2

"""Hierarchical NURBS spaces with angular resolution doubling per ring.

All levels share the final graded radial breakpoints z_0 < ... < z_J1;
level l carries J2_base * 2^l uniform angular cells. Ring r (0-based,
between z_r and z_{r+1}) is resolved on level min(r, L).

Functions are selected by the hierarchical B-spline rule on the nested
annuli Omega_l = {z1 >= z_l}: a level-l function is active when its support
lies in Omega_l but not in Omega_{l+1}. Since supports in z1 start at a knot
xi_{i1}, this reads z_l <= xi_{i1} < z_{l+1} (no upper bound on level L).
With ``rational`` set, functions are w_i B_i divided by the sum of all active
weighted B-splines, which equals W since exactly one level is active per
radial index. Otherwise the plain B-splines are used (unit weights); the
geometry stays the exact NURBS map either way.
"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from geometry.bezier_mesh import BezierMesh, build_ring_mesh
from geometry.sector import SectorGeometry
from spaces.tensor_space import (
    angular_refinement,
    check_degree_and_regularity,
    radial_refinement,
    refine_homogeneous,
)
from splines.knot_vector import KNOT_TOLERANCE
from splines.nurbs import TensorBasisEvaluation, TensorNurbsBasis, WeightVector, rationalize

logger = logging.getLogger(__name__)


class HierarchicalSpace:
    """Multilevel space; DOFs are ordered by (level, lexicographic index)."""

    kind = 'hierarchical'

    def __init__(
        self,
        geometry: SectorGeometry,
        level_bases: List[TensorNurbsBasis],
        active: List[np.ndarray],
        mesh: BezierMesh,
        degree: int,
        regularity: int,
        mu: float,
        rational: bool = True,
    ):
        self.geometry = geometry
        self.level_bases = level_bases
        self.active = active
        self.mesh = mesh
        self.degree = degree
        self.regularity = regularity
        self.mu = mu
        self.rational = rational

        self._global_index = []
        offset = 0
        for mask in active:
            lookup = np.full(mask.size, -1, dtype=int)
            lookup[mask] = offset + np.arange(int(mask.sum()))
            self._global_index.append(lookup)
            offset += int(mask.sum())
        self._num_dofs = offset

    @property
    def levels(self) -> int:
        return len(self.level_bases) - 1

    @property
    def num_dofs(self) -> int:
        return self._num_dofs

    @property
    def max_local_size(self) -> int:
        return sum(b.local_size for b in self.level_bases)

    @property
    def level_sizes(self) -> List[int]:
        return [int(mask.sum()) for mask in self.active]

    @property
    def ring_angular_counts(self) -> Tuple[int, ...]:
        return self.mesh.ring_angular_counts

    def global_indices(self, level: int) -> np.ndarray:
        """Map from level-local tensor indices to DOFs (-1 if inactive)."""
        return self._global_index[level]

    def dof_levels(self) -> np.ndarray:
        return np.repeat(np.arange(self.levels + 1), self.level_sizes)

    def dof_multi_indices(self) -> np.ndarray:
        """(level, i1, i2) for every DOF, shape (num_dofs, 3)."""
        rows = []
        for level, (basis, mask) in enumerate(zip(self.level_bases, self.active)):
            i1, i2 = basis.unravel(np.flatnonzero(mask))
            rows.append(np.column_stack([np.full(i1.size, level), i1, i2]))
        return np.vstack(rows)

    def dirichlet_mask(self) -> np.ndarray:
        """Active functions with i1 = n1 - 1, the only ones nonzero at z1 = 1."""
        mask = np.zeros(self.num_dofs, dtype=bool)
        for basis, lookup in zip(self.level_bases, self._global_index):
            n1, _ = basis.shape
            i1, _ = basis.unravel(np.arange(basis.size))
            hits = lookup[(i1 == n1 - 1) & (lookup >= 0)]
            mask[hits] = True
        return mask

    def singular_edge_function_count(self) -> int:
        """Number of active functions whose support touches z1 = 0."""
        count = 0
        for basis, mask in zip(self.level_bases, self.active):
            i1, _ = basis.unravel(np.flatnonzero(mask))
            count += int(np.sum(basis.kv1.knots[i1] <= KNOT_TOLERANCE))
        return count

    def evaluate(self, z1, z2) -> TensorBasisEvaluation:
        """Active rational functions at the points, padded with index -1.

        Every level is evaluated; padded entries have zero value and
        gradient.
        """
        indices, values, gradients = [], [], []
        for basis, lookup in zip(self.level_bases, self._global_index):
            local, wb, grad_wb = basis.numerators(z1, z2)
            glob = lookup[local]
            inactive = glob < 0
            wb = np.where(inactive, 0.0, wb)
            grad_wb = np.where(inactive[:, :, None], 0.0, grad_wb)
            indices.append(glob)
            values.append(wb)
            gradients.append(grad_wb)
        return rationalize(
            np.concatenate(indices, axis=1),
            np.concatenate(values, axis=1),
            np.concatenate(gradients, axis=1),
        )

    def summary(self) -> Dict:
        return {
            'kind': self.kind,
            'degree': self.degree,
            'regularity': self.regularity,
            'mu': self.mu,
            'basis': 'nurbs' if self.rational else 'bspline',
            'levels': self.levels,
            'level_sizes': self.level_sizes,
            'dofs': self.num_dofs,
            'constrained': int(self.dirichlet_mask().sum()),
            'elements': self.mesh.num_elements,
            'ring_angular_counts': list(self.ring_angular_counts),
        }


def _activate(basis: TensorNurbsBasis, breaks: np.ndarray, level: int, last: int) -> np.ndarray:
    i1, _ = basis.unravel(np.arange(basis.size))
    start = basis.kv1.knots[i1]
    lower = breaks[level] - KNOT_TOLERANCE
    if level == last:
        return start >= lower
    upper = breaks[level + 1] - KNOT_TOLERANCE
    return (start >= lower) & (start < upper)


def build_hierarchical_space(
    geo: SectorGeometry,
    p: int,
    k: int,
    L: int,
    mu: float,
    J1: int,
    J2_base: int,
    rational: bool = True,
) -> HierarchicalSpace:
    """Build the ring-doubling hierarchical space.

    Args:
        geo: Coarse sector geometry
        p: Degree in both directions (p >= 2)
        k: Regularity at inserted knots
        L: Number of refinement levels above the base (0 <= L < J1)
        mu: Radial grading parameter
        J1: Radial subdivisions shared by all levels
        J2_base: Angular subdivisions of level 0, a multiple of geo.n_arc
        rational: NURBS functions if True, B-splines otherwise

    Raises:
        ValueError: On invalid parameters
    """
    check_degree_and_regularity(p, k)
    if L < 0:
        raise ValueError(f"Number of levels must be >= 0, got {L}")
    if L >= J1:
        raise ValueError(f"Need more radial rings than levels: L={L}, J1={J1}")

    mesh = build_ring_mesh(geo, J1, J2_base, L, mu)
    breaks = mesh.radial_breakpoints
    kv1, T1 = radial_refinement(geo, p, k, J1, mu)

    bases, active = [], []
    for level in range(L + 1):
        kv2, T2 = angular_refinement(geo, p, k, J2_base * 2 ** level)
        weights, _ = refine_homogeneous(geo, T1, T2)
        if not rational:
            weights = np.ones_like(weights)
        basis = TensorNurbsBasis(kv1, kv2, WeightVector(weights))
        bases.append(basis)
        active.append(_activate(basis, breaks, level, L))

    space = HierarchicalSpace(geo, bases, active, mesh, p, k, mu, rational)
    logger.info(
        f"Built hierarchical {'NURBS' if rational else 'B-spline'} space "
        f"p={p}, k={k}, L={L}, J1={J1}, J2_base={J2_base}: "
        f"{space.num_dofs} DOFs over levels {space.level_sizes}"
    )
    return space

"""Parametric Bezier meshes of the unit square.

A mesh is a sequence of radial rings; ring r spans
[radial_breakpoints[r], radial_breakpoints[r+1]] in z1 and is split into
``ring_angular_counts[r]`` uniform cells in z2. Tensor meshes have the same
count on every ring.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from geometry.sector import SectorGeometry
from splines.knot_vector import graded_breakpoints

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BezierMesh:
    """Elements Q = (z1a, z1b) x (z2a, z2b) stored as rows of ``elements``."""

    radial_breakpoints: np.ndarray
    ring_angular_counts: Sequence[int]
    mu: float = 1.0
    elements: np.ndarray = field(init=False, repr=False)
    rings: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        breaks = np.asarray(self.radial_breakpoints, dtype=float)
        counts = [int(c) for c in self.ring_angular_counts]
        if len(counts) != breaks.size - 1:
            raise ValueError(
                f"Expected {breaks.size - 1} ring counts, got {len(counts)}"
            )
        if any(c < 1 for c in counts):
            raise ValueError("Every ring needs at least one angular cell")

        rows = []
        rings = []
        for r, count in enumerate(counts):
            angular = np.arange(count + 1) / count
            ring = np.column_stack([
                np.full(count, breaks[r]),
                np.full(count, breaks[r + 1]),
                angular[:-1],
                angular[1:],
            ])
            rows.append(ring)
            rings.append(np.full(count, r))

        elements = np.vstack(rows)
        elements.setflags(write=False)
        object.__setattr__(self, 'radial_breakpoints', breaks)
        object.__setattr__(self, 'ring_angular_counts', tuple(counts))
        object.__setattr__(self, 'elements', elements)
        object.__setattr__(self, 'rings', np.concatenate(rings))

    @property
    def num_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def num_rings(self) -> int:
        return len(self.ring_angular_counts)

    @property
    def is_tensor(self) -> bool:
        return len(set(self.ring_angular_counts)) == 1

    @property
    def areas(self) -> np.ndarray:
        """Parametric element areas."""
        e = self.elements
        return (e[:, 1] - e[:, 0]) * (e[:, 3] - e[:, 2])

    def angular_breakpoints(self, ring: int = -1) -> np.ndarray:
        count = self.ring_angular_counts[ring]
        return np.arange(count + 1) / count

    def parametric_aspect_ratio(self) -> float:
        """Angular over radial extent of the innermost element."""
        h_radial = self.radial_breakpoints[1] - self.radial_breakpoints[0]
        h_angular = 1.0 / self.ring_angular_counts[0]
        return h_angular / h_radial

    def physical_diagnostics(self, geo: SectorGeometry) -> Dict[str, float]:
        """Sizes of the innermost physical element K = F(Q).

        Radial extent equals the parametric one since |F| = z1; the outer arc
        length is measured along the circle of the element's outer radius.
        """
        r_out = float(self.radial_breakpoints[1])
        edges = geo.polar_angle(self.angular_breakpoints(0)[:2])
        arc = r_out * float(edges[1] - edges[0])
        return {
            'radial_extent': r_out,
            'outer_arc_length': arc,
            'physical_aspect_ratio': r_out / arc,
            'parametric_aspect_ratio': self.parametric_aspect_ratio(),
        }

    def summary(self) -> Dict:
        return {
            'num_elements': self.num_elements,
            'num_rings': self.num_rings,
            'ring_angular_counts': list(self.ring_angular_counts),
            'mu': self.mu,
        }


def _check_angular_count(geo: SectorGeometry, J2: int) -> None:
    if J2 < 1 or J2 % geo.n_arc != 0:
        raise ValueError(
            f"Angular subdivision J2={J2} must be a positive multiple of the "
            f"{geo.n_arc} coarse arcs"
        )


def build_mesh(geo: SectorGeometry, J1: int, J2: int, mu: float = 1.0) -> BezierMesh:
    """Tensor Bezier mesh with graded radial and uniform angular breakpoints.

    Args:
        geo: Sector geometry
        J1: Radial subdivisions
        J2: Angular subdivisions, a multiple of geo.n_arc
        mu: Grading parameter in (0, 1]

    Raises:
        ValueError: If J2 is incompatible with the arcs or mu is out of range
    """
    _check_angular_count(geo, J2)
    mesh = BezierMesh(graded_breakpoints(J1, mu), [J2] * J1, mu)
    logger.debug(f"Tensor mesh: J1={J1}, J2={J2}, mu={mu}, {mesh.num_elements} elements")
    return mesh


def ring_angular_counts(J1: int, J2_base: int, levels: int) -> list:
    """Angular cells per ring: doubling outward until the finest level."""
    return [J2_base * 2 ** min(r, levels) for r in range(J1)]


def build_ring_mesh(
    geo: SectorGeometry,
    J1: int,
    J2_base: int,
    levels: int,
    mu: float = 1.0,
) -> BezierMesh:
    """Hierarchical mesh: ring r (from the vertex) has J2_base * 2^min(r, levels) cells."""
    _check_angular_count(geo, J2_base)
    counts = ring_angular_counts(J1, J2_base, levels)
    mesh = BezierMesh(graded_breakpoints(J1, mu), counts, mu)
    logger.debug(f"Ring mesh: J1={J1}, counts={counts}, {mesh.num_elements} elements")
    return mesh

"""Evaluation of pushed-forward basis functions at quadrature points.

Elements are processed in chunks so that no global evaluation matrix is
ever stored.
"""

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from config.settings import settings
from core.exceptions import QuadratureError
from geometry.sector import NurbsPatch
from numerics.quadrature import QuadratureRule

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElementChunk:
    """Basis data for E elements with Q points each and n_loc local functions.

    Attributes:
        element_ids: (E,) positions in the mesh element list
        indices: (E, n_loc) DOF indices, -1 for padding
        values: (E, Q, n_loc)
        gradients: (E, Q, n_loc, 2) physical gradients
        weights: (E, Q) physical quadrature weights (parametric weight * |det J|)
        points: (E, Q, 2) physical quadrature points
        parametric: (E, Q, 2) parametric quadrature points (z1, z2)
    """

    element_ids: np.ndarray
    indices: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    weights: np.ndarray
    points: np.ndarray
    parametric: np.ndarray


def physical_gradients(jac: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Solve J^T g = grad_zeta per point.

    Args:
        jac: (P, 2, 2) Jacobians with jac[n, d, a] = dF_d / dz_a
        grads: (P, n_loc, 2) parametric gradients

    Returns:
        (P, n_loc, 2) physical gradients
    """
    rhs = np.transpose(grads, (0, 2, 1))
    return np.transpose(np.linalg.solve(np.transpose(jac, (0, 2, 1)), rhs), (0, 2, 1))


def evaluate_elements(space, geo: NurbsPatch, rule: QuadratureRule, element_ids) -> ElementChunk:
    """Evaluate the space's basis on a set of mesh elements.

    Raises:
        QuadratureError: If any value, gradient or weight is not finite
    """
    element_ids = np.asarray(element_ids, dtype=int)
    elements = space.mesh.elements[element_ids]
    z1, z2, w = rule.map_elements(elements)
    n_el, n_q = z1.shape

    ev = space.evaluate(z1.ravel(), z2.ravel())
    jac, det = geo.jacobian(z1.ravel(), z2.ravel())
    grads = physical_gradients(jac, ev.gradients)
    points = geo.map(z1.ravel(), z2.ravel())

    n_loc = ev.values.shape[1]
    values = ev.values.reshape(n_el, n_q, n_loc)
    gradients = grads.reshape(n_el, n_q, n_loc, 2)
    weights = w * np.abs(det).reshape(n_el, n_q)

    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(gradients))
            and np.all(np.isfinite(weights))):
        bad = element_ids[~np.isfinite(gradients).all(axis=(1, 2, 3))]
        logger.error(f"Non-finite basis data on elements {bad[:5]}")
        raise QuadratureError(f"Non-finite value at quadrature points of elements {bad[:5]}")

    # All points of one element share the active functions.
    indices = ev.indices.reshape(n_el, n_q, n_loc)[:, 0, :]
    return ElementChunk(
        element_ids=element_ids,
        indices=indices,
        values=values,
        gradients=gradients,
        weights=weights,
        points=points.reshape(n_el, n_q, 2),
        parametric=np.stack([z1, z2], axis=-1),
    )


def chunk_ranges(num_elements: int, chunk_size: int = None) -> list:
    """Consecutive element id ranges of at most ``chunk_size`` elements."""
    chunk_size = chunk_size or settings.ASSEMBLY_CHUNK_SIZE
    return [
        np.arange(start, min(start + chunk_size, num_elements))
        for start in range(0, num_elements, chunk_size)
    ]


def iter_chunks(space, geo: NurbsPatch, rule: QuadratureRule, chunk_size: int = None) -> Iterator[ElementChunk]:
    """Yield evaluated element chunks in mesh order."""
    for ids in chunk_ranges(space.mesh.num_elements, chunk_size):
        logger.debug(f"Evaluating elements {ids[0]}..{ids[-1]}")
        yield evaluate_elements(space, geo, rule, ids)

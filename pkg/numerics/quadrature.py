"""Tensor-product Gauss-Legendre rules on Bezier elements."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from cachetools import LRUCache, cached

from config.settings import settings

logger = logging.getLogger(__name__)


@cached(cache=LRUCache(maxsize=64))
def gauss_legendre(q: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on (0, 1).

    Raises:
        ValueError: If q < 1
    """
    if q < 1:
        raise ValueError(f"Number of quadrature points must be >= 1, got {q}")
    nodes, weights = np.polynomial.legendre.leggauss(q)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@dataclass(frozen=True)
class QuadratureRule:
    """q x q Gauss-Legendre points per element, first direction fastest."""

    q: int = settings.QUADRATURE_POINTS

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"Number of quadrature points must be >= 1, got {self.q}")

    @property
    def points_per_element(self) -> int:
        return self.q * self.q

    @property
    def reference(self) -> Tuple[np.ndarray, np.ndarray]:
        return gauss_legendre(self.q)

    def map_elements(self, elements: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Quadrature points and weights on a batch of elements.

        Args:
            elements: (E, 4) rows (z1a, z1b, z2a, z2b)

        Returns:
            Tuple (z1, z2, weights), each of shape (E, q*q)
        """
        elements = np.atleast_2d(np.asarray(elements, dtype=float))
        nodes, weights = self.reference
        h1 = elements[:, 1] - elements[:, 0]
        h2 = elements[:, 3] - elements[:, 2]

        t1 = elements[:, 0, None] + h1[:, None] * nodes[None, :]
        t2 = elements[:, 2, None] + h2[:, None] * nodes[None, :]
        z1 = np.tile(t1, (1, self.q))
        z2 = np.repeat(t2, self.q, axis=1)
        w = (h1 * h2)[:, None] * np.outer(weights, weights).ravel()[None, :]
        return z1, z2, w


def element_rule(element, q: int = settings.QUADRATURE_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """Points (q*q, 2) and weights (q*q,) on one parametric rectangle."""
    z1, z2, w = QuadratureRule(q).map_elements(np.asarray(element, dtype=float)[None, :])
    return np.column_stack([z1[0], z2[0]]), w[0]

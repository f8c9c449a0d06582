"""Quadrature seminorms, eigenfunction alignment and eigenfunction errors.

Fields are callables mapping an ``ElementChunk`` to ``(values, gradients)``
of shapes (E, Q) and (E, Q, 2). Every sum runs over the same quadrature
points as assembly, which lie strictly inside the elements, so nothing is
ever evaluated on the singular edge z1 = 0.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from core.exceptions import AlignmentError, QuadratureError
from exact.spectrum import ExactEigenpair, eval_exact_polar
from geometry.sector import SectorGeometry
from numerics.element_evaluator import ElementChunk, iter_chunks
from numerics.quadrature import QuadratureRule

logger = logging.getLogger(__name__)

Field = Callable[[ElementChunk], Tuple[np.ndarray, np.ndarray]]

# Below this |cosine| the discrete function is taken to approximate another mode.
MIN_ALIGNMENT_COSINE = 0.1


def discrete_field(coefficients: np.ndarray) -> Field:
    """u_h = sum_i c_i N_i for coefficients over all space DOFs."""
    # Trailing zero absorbs padded index -1.
    padded = np.append(np.asarray(coefficients, dtype=float), 0.0)

    def field(chunk: ElementChunk):
        local = padded[chunk.indices]
        values = np.einsum('eqa,ea->eq', chunk.values, local)
        gradients = np.einsum('eqad,ea->eqd', chunk.gradients, local)
        return values, gradients

    return field


def exact_field(pair: ExactEigenpair, geo: SectorGeometry) -> Field:
    """Exact eigenfunction at quadrature points.

    Polar coordinates come from the parameterization, r = z1 and
    phi = polar angle of z2, so crack faces are never confused.
    """

    def field(chunk: ElementChunk):
        z1 = chunk.parametric[..., 0].ravel()
        z2 = chunk.parametric[..., 1].ravel()
        u, grad = eval_exact_polar(pair, z1, geo.polar_angle(z2))
        shape = chunk.weights.shape
        return u.reshape(shape), grad.reshape(shape + (2,))

    return field


def constant_field(value: float) -> Field:
    def field(chunk: ElementChunk):
        return np.full(chunk.weights.shape, float(value)), np.zeros(chunk.weights.shape + (2,))

    return field


def combine(first: Field, second: Field, a: float = 1.0, b: float = -1.0) -> Field:
    """a * first + b * second."""

    def field(chunk: ElementChunk):
        v1, g1 = first(chunk)
        v2, g2 = second(chunk)
        return a * v1 + b * v2, a * g1 + b * g2

    return field


def _checked(field: Field, chunk: ElementChunk):
    values, gradients = field(chunk)
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(gradients))):
        logger.error(f"Non-finite field value near elements {chunk.element_ids[:5]}")
        raise QuadratureError("Field is not finite at a quadrature point")
    return values, gradients


def _sums(fields, space, geo, rule: QuadratureRule = None, chunk_size: int = None) -> np.ndarray:
    """Quadrature sums [sum v_a v_b w, sum grad v_a . grad v_b w] for field pairs.

    Returns:
        Array of shape (len(fields), 2)
    """
    rule = rule or QuadratureRule()
    totals = np.zeros((len(fields), 2))
    for chunk in iter_chunks(space, geo, rule, chunk_size):
        cache = {}
        for n, (fa, fb) in enumerate(fields):
            for f in (fa, fb):
                if id(f) not in cache:
                    cache[id(f)] = _checked(f, chunk)
            va, ga = cache[id(fa)]
            vb, gb = cache[id(fb)]
            totals[n, 0] += np.sum(va * vb * chunk.weights)
            totals[n, 1] += np.sum(np.einsum('eqd,eqd->eq', ga, gb) * chunk.weights)
    return totals


def seminorm_L2h(field: Field, space, geo, rule: QuadratureRule = None, chunk_size: int = None) -> float:
    """(sum_k sum_l v(x_lk)^2 w_lk)^(1/2)."""
    totals = _sums([(field, field)], space, geo, rule, chunk_size)
    return float(np.sqrt(totals[0, 0]))


def seminorm_H1h(field: Field, space, geo, rule: QuadratureRule = None, chunk_size: int = None) -> float:
    """(|v|^2_L2h + sum_k sum_l |grad v(x_lk)|^2 w_lk)^(1/2)."""
    totals = _sums([(field, field)], space, geo, rule, chunk_size)
    return float(np.sqrt(totals[0, 0] + totals[0, 1]))


def gradient_seminorm(field: Field, space, geo, rule: QuadratureRule = None, chunk_size: int = None) -> float:
    """Gradient part of the H1_h seminorm alone."""
    totals = _sums([(field, field)], space, geo, rule, chunk_size)
    return float(np.sqrt(totals[0, 1]))


@dataclass(frozen=True)
class Alignment:
    """Scaled coefficients with <u_h, u> > 0 and |u_h| = |u| in L2_h.

    Attributes:
        coefficients: Rescaled space coefficients
        scale: Factor applied to the input coefficients
        cosine: <u_h, u> / (|u_h| |u|) before rescaling
    """

    coefficients: np.ndarray
    scale: float
    cosine: float


def l2h_cosine(coefficients: np.ndarray, exact: Field, space, geo,
               rule: QuadratureRule = None, chunk_size: int = None) -> float:
    """Cosine of the L2_h angle between u_h and an exact field."""
    uh = discrete_field(coefficients)
    totals = _sums([(uh, exact), (uh, uh), (exact, exact)], space, geo, rule, chunk_size)
    inner, norm_h, norm = totals[0, 0], totals[1, 0], totals[2, 0]
    if norm_h <= 0.0 or norm <= 0.0:
        return 0.0
    return float(inner / np.sqrt(norm_h * norm))


def align(coefficients: np.ndarray, exact: Field, space, geo,
          rule: QuadratureRule = None, chunk_size: int = None) -> Alignment:
    """Fix sign and scale of a discrete eigenfunction against the exact one.

    Raises:
        AlignmentError: If |cosine| < MIN_ALIGNMENT_COSINE
    """
    coefficients = np.asarray(coefficients, dtype=float)
    uh = discrete_field(coefficients)
    totals = _sums([(uh, exact), (uh, uh), (exact, exact)], space, geo, rule, chunk_size)
    inner, norm_h_sq, norm_sq = totals[:, 0]

    if norm_h_sq <= 0.0 or norm_sq <= 0.0:
        raise AlignmentError("Cannot align a zero function")
    norm_h, norm = np.sqrt(norm_h_sq), np.sqrt(norm_sq)
    cosine = float(inner / (norm_h * norm))
    if abs(cosine) < MIN_ALIGNMENT_COSINE:
        logger.error(f"Discrete and exact eigenfunctions nearly orthogonal (cos={cosine:.3e})")
        raise AlignmentError(
            f"L2_h cosine {cosine:.3e} below {MIN_ALIGNMENT_COSINE}; eigenvalues likely mismatched"
        )

    scale = float(np.sign(cosine) * norm / norm_h)
    return Alignment(coefficients * scale, scale, cosine)


@dataclass(frozen=True)
class EigenfunctionErrors:
    l2: float
    h1: float
    cosine: float
    scale: float


def eigenfunction_errors(coefficients: np.ndarray, pair: ExactEigenpair, space, geo,
                         rule: QuadratureRule = None, chunk_size: int = None) -> EigenfunctionErrors:
    """|u - u_h| in L2_h and H1_h after alignment.

    Two passes over the elements: the first fixes the scale, the second sums
    the pointwise differences directly.
    """
    exact = exact_field(pair, geo)
    aligned = align(coefficients, exact, space, geo, rule, chunk_size)
    error = combine(exact, discrete_field(aligned.coefficients))
    totals = _sums([(error, error)], space, geo, rule, chunk_size)
    l2_sq, grad_sq = totals[0]
    result = EigenfunctionErrors(
        l2=float(np.sqrt(l2_sq)),
        h1=float(np.sqrt(l2_sq + grad_sq)),
        cosine=aligned.cosine,
        scale=aligned.scale,
    )
    logger.debug(
        f"Errors for mode (k={pair.k}, m={pair.m}): L2_h={result.l2:.3e}, "
        f"H1_h={result.h1:.3e}, cos={result.cosine:.6f}"
    )
    return result

"""Exact Laplace eigenpairs of the sector with Dirichlet arc and Neumann legs.

u_{k,m}(r, phi) = J_nu(mu r) cos(nu phi), nu = k pi / omega, lambda = mu^2,
where mu is the m-th positive zero of J_nu.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.exceptions import SingularPointError
from exact.bessel import bessel_j, bessel_j_deriv, bessel_zeros, bessel_zeros_below

logger = logging.getLogger(__name__)

INTEGER_TOLERANCE = 1e-12
ANGLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Regularity:
    """Sobolev regularity of an eigenfunction.

    Smooth functions lie in H^s for every s; otherwise s < sobolev_limit.
    """

    smooth: bool
    sobolev_limit: Optional[float]

    @property
    def label(self) -> str:
        if self.smooth:
            return 'smooth'
        return f"H^{math.floor(self.sobolev_limit)}"


def classify_regularity(nu: float) -> Regularity:
    """Smooth iff nu is a nonnegative integer, else limited by s* = nu + 1."""
    if abs(nu - round(nu)) <= INTEGER_TOLERANCE:
        return Regularity(smooth=True, sobolev_limit=None)
    return Regularity(smooth=False, sobolev_limit=nu + 1.0)


@dataclass(frozen=True)
class ExactEigenpair:
    """Angular index k >= 0, radial index m >= 1 and the zero mu = mu_{nu,m}."""

    k: int
    m: int
    nu: float
    mu: float
    omega: float

    @property
    def eigenvalue(self) -> float:
        return self.mu * self.mu

    @property
    def frequency(self) -> float:
        return self.mu

    @property
    def regularity(self) -> Regularity:
        return classify_regularity(self.nu)

    def evaluate(self, x, y, face: str = 'lower') -> Tuple[np.ndarray, np.ndarray]:
        return eval_exact(self, x, y, face)


def angular_order(omega: float, k: int) -> float:
    return k * math.pi / omega


def exact_spectrum(omega: float, count: int) -> List[ExactEigenpair]:
    """The ``count`` smallest exact eigenpairs, ascending in lambda.

    Orders are scanned by increasing k while a running upper bound U (the
    count-th smallest zero found so far) is maintained; since mu_{nu,m} > nu,
    no order with nu >= U can contribute. Ties are broken by (k, m).

    Raises:
        ValueError: If count < 1 or omega lies outside (0, 2*pi]
    """
    if count < 1:
        raise ValueError(f"Eigenpair count must be >= 1, got {count}")
    if not 0.0 < omega <= 2.0 * math.pi:
        raise ValueError(f"Sector angle must lie in (0, 2*pi], got {omega}")

    candidates = []
    bound = math.inf
    k = 0
    while True:
        nu = angular_order(omega, k)
        if nu >= bound:
            break
        if math.isinf(bound):
            zeros = bessel_zeros(nu, count)
        else:
            zeros = bessel_zeros_below(nu, bound)
        candidates.extend((mu, k, m, nu) for m, mu in enumerate(zeros, start=1))
        if len(candidates) >= count:
            bound = sorted(c[0] for c in candidates)[count - 1]
        k += 1

    candidates.sort(key=lambda c: (c[0] * c[0], c[1], c[2]))
    pairs = [
        ExactEigenpair(k=k, m=m, nu=nu, mu=mu, omega=omega)
        for mu, k, m, nu in candidates[:count]
    ]
    logger.debug(f"Exact spectrum: omega={omega:.6g}, {count} pairs, orders up to k={k - 1}")
    return pairs


def find_pair(omega: float, k: int, m: int) -> ExactEigenpair:
    """The eigenpair with angular index k and radial index m."""
    if k < 0 or m < 1:
        raise ValueError(f"Invalid mode (k={k}, m={m})")
    nu = angular_order(omega, k)
    return ExactEigenpair(k=k, m=m, nu=nu, mu=bessel_zeros(nu, m)[m - 1], omega=omega)


def polar_coordinates(pair: ExactEigenpair, x, y, face: str = 'lower'):
    """Radius and angle in [0, omega] measured from the positive x-axis leg.

    Points on the positive x-axis take phi = 0 for face 'lower' and
    phi = omega for face 'upper' (only meaningful when omega = 2 pi).

    Raises:
        ValueError: If a point lies outside the closed sector
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    r = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), 2.0 * math.pi)

    wrapped = phi > pair.omega + ANGLE_TOLERANCE
    near_leg = wrapped & (2.0 * math.pi - phi <= ANGLE_TOLERANCE)
    phi = np.where(near_leg, 0.0, phi)
    if np.any(wrapped & ~near_leg & (r > 0)):
        raise ValueError("Point outside the sector")

    full_disk = abs(pair.omega - 2.0 * math.pi) <= ANGLE_TOLERANCE
    on_crack = full_disk & (np.abs(y) <= ANGLE_TOLERANCE * np.maximum(r, 1.0)) & (x > 0)
    if face == 'upper':
        phi = np.where(on_crack & (phi < 0.5 * pair.omega), pair.omega, phi)
    elif face == 'lower':
        phi = np.where(on_crack & (phi > 0.5 * pair.omega), 0.0, phi)
    else:
        raise ValueError(f"Unknown face selector {face!r}")
    return r, phi


def eval_exact_polar(pair: ExactEigenpair, r, phi) -> Tuple[np.ndarray, np.ndarray]:
    """u and its Cartesian gradient from polar coordinates.

    Raises:
        SingularPointError: For the gradient at r = 0 when 0 < nu < 1
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    nu, mu = pair.nu, pair.mu

    rho = mu * r
    j = bessel_j(nu, rho)
    cos_p, sin_p = np.cos(nu * phi), np.sin(nu * phi)
    u = j * cos_p

    at_origin = r == 0.0
    if np.any(at_origin) and 0.0 < nu < 1.0:
        raise SingularPointError(f"Gradient of the eigenfunction with nu={nu} is unbounded at r = 0")

    du_dr = mu * bessel_j_deriv(nu, rho) * cos_p
    safe_r = np.where(at_origin, 1.0, r)
    du_dphi_over_r = np.where(at_origin, 0.0, -nu * j * sin_p / safe_r)

    c, s = np.cos(phi), np.sin(phi)
    grad = np.column_stack([
        du_dr * c - du_dphi_over_r * s,
        du_dr * s + du_dphi_over_r * c,
    ])
    if np.any(at_origin) and abs(nu - 1.0) <= INTEGER_TOLERANCE:
        # u ~ (mu/2) x near the vertex
        grad[at_origin] = [0.5 * mu, 0.0]
    elif np.any(at_origin):
        grad[at_origin] = 0.0
    return u, grad


def eval_exact(pair: ExactEigenpair, x, y, face: str = 'lower') -> Tuple[np.ndarray, np.ndarray]:
    """u = J_nu(mu r) cos(nu phi) and its gradient at physical points.

    Args:
        pair: Exact eigenpair
        x, y: Point coordinates in the closed sector
        face: Which Neumann face on-crack points belong to ('lower' or 'upper')

    Returns:
        Tuple (u, grad) with shapes (N,) and (N, 2)
    """
    r, phi = polar_coordinates(pair, x, y, face)
    return eval_exact_polar(pair, r, phi)

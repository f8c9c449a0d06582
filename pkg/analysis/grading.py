"""Choice of the radial grading parameter mu."""

import math

from exact.spectrum import INTEGER_TOLERANCE, angular_order

GRADING_SAFETY = 0.9


def _check(omega: float, p: int) -> None:
    if not 0.0 < omega <= 2.0 * math.pi:
        raise ValueError(f"Sector angle must lie in (0, 2*pi], got {omega}")
    if p < 1:
        raise ValueError(f"Degree must be >= 1, got {p}")


def strong_grading(omega: float, p: int) -> float:
    """mu = 0.9 * nu_1 / p for the most singular mode.

    Uniform (mu = 1) when nu_1 is an integer or nu_1 >= p.
    """
    return mode_grading(omega, p, 1)


def mode_grading(omega: float, p: int, k: int) -> float:
    """mu for a single angular mode: 1 if nu_k is an integer or nu_k >= p."""
    _check(omega, p)
    if k < 0:
        raise ValueError(f"Angular index must be >= 0, got {k}")
    nu = angular_order(omega, k)
    if abs(nu - round(nu)) <= INTEGER_TOLERANCE or nu >= p:
        return 1.0
    return GRADING_SAFETY * nu / p

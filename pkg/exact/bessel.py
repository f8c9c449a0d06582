"""Bessel functions of the first kind of real order and their positive zeros."""

import logging
import math
import threading
from typing import Tuple

import numpy as np
from cachetools import LRUCache, cached
from scipy import optimize, special

from config.settings import settings
from core.exceptions import SingularPointError, SolverError

logger = logging.getLogger(__name__)

# Grid step for counting sign changes; well below the zero spacing (about pi).
SCAN_STEP = 0.05
SCAN_BLOCK = 512
NEWTON_MAX_ITER = 50


def _check_order(nu: float) -> None:
    if nu < 0 or not math.isfinite(nu):
        raise ValueError(f"Bessel order must be finite and >= 0, got {nu}")


def bessel_j(nu: float, z):
    """J_nu(z) for nu >= 0 and z >= 0.

    Raises:
        ValueError: On a negative order or argument
    """
    _check_order(nu)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("Bessel argument must be >= 0")
    return special.jv(nu, z)


def bessel_j_deriv(nu: float, z):
    """J_nu'(z) = (nu/z) J_nu(z) - J_{nu+1}(z).

    At z = 0 the derivative is 0 for nu = 0 and nu > 1, and 1/2 for nu = 1.

    Raises:
        SingularPointError: At z = 0 for 0 < nu < 1, where J_nu' is unbounded
    """
    _check_order(nu)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ValueError("Bessel argument must be >= 0")

    at_zero = z == 0.0
    if np.any(at_zero) and 0.0 < nu < 1.0:
        raise SingularPointError(f"J_nu'(0) is unbounded for nu = {nu}")

    safe = np.where(at_zero, 1.0, z)
    result = special.jvp(nu, safe)
    if nu == 1.0:
        limit = 0.5
    else:
        limit = 0.0
    return np.where(at_zero, limit, result)


def mcmahon_guess(nu: float, m: int) -> float:
    """Two-term McMahon asymptotic for the m-th zero.

    beta - (4 nu^2 - 1) / (8 beta) with beta = (m + nu/2 - 1/4) * pi.
    """
    beta = (m + 0.5 * nu - 0.25) * math.pi
    return beta - (4.0 * nu * nu - 1.0) / (8.0 * beta)


def _brackets(nu: float, count: int = None, upper: float = None):
    """Sign-change brackets of the first zeros of J_nu.

    Scanning starts at max(nu, SCAN_STEP): J_nu has no positive zero below nu.
    Stops after ``count`` brackets or once the grid passes ``upper``.
    """
    start = max(nu, SCAN_STEP)
    found = []
    block = 0
    while True:
        grid = start + SCAN_STEP * (np.arange(SCAN_BLOCK + 1) + block * SCAN_BLOCK)
        values = special.jv(nu, grid)
        signs = np.sign(values)
        changes = np.flatnonzero(signs[:-1] * signs[1:] <= 0)
        for i in changes:
            if signs[i] == 0:
                # Zero exactly on a grid point; it is counted once from the left.
                if found and found[-1][1] == grid[i]:
                    continue
                found.append((grid[i], grid[i]))
            else:
                found.append((grid[i], grid[i + 1]))
            if count is not None and len(found) >= count:
                return found[:count]
            if upper is not None and grid[i] > upper:
                return [b for b in found if b[0] <= upper]
        if upper is not None and grid[-1] > upper:
            return [b for b in found if b[0] <= upper]
        block += 1


def _refine(nu: float, bracket: Tuple[float, float], guess: float) -> float:
    """Safeguarded Newton inside a sign-change bracket, bisection as fallback."""
    a, b = bracket
    if a == b:
        return float(a)
    x = min(max(guess, a), b)
    for _ in range(NEWTON_MAX_ITER):
        fx = special.jv(nu, x)
        dfx = special.jvp(nu, x)
        if dfx == 0.0:
            break
        step = fx / dfx
        x_new = x - step
        if not a <= x_new <= b:
            break
        x = x_new
        if abs(step) <= 1e-15 * x:
            return float(x)
    else:
        logger.debug(f"Newton did not settle for nu={nu}, bracket {bracket}")

    try:
        root = optimize.brentq(
            lambda t: special.jv(nu, t), a, b,
            xtol=1e-15, rtol=4 * np.finfo(float).eps,
        )
    except ValueError as e:
        logger.error(f"Bisection failed for nu={nu} on {bracket}: {e}")
        raise SolverError(f"Could not locate Bessel zero of order {nu} in {bracket}") from e
    # Final Newton polish from the bracketed root.
    dfx = special.jvp(nu, root)
    if dfx != 0.0:
        polished = root - special.jv(nu, root) / dfx
        if a <= polished <= b:
            root = polished
    return float(root)


_zero_lock = threading.Lock()


@cached(cache=LRUCache(maxsize=settings.BESSEL_CACHE_SIZE), lock=_zero_lock)
def bessel_zeros(nu: float, count: int) -> Tuple[float, ...]:
    """The first ``count`` positive zeros of J_nu, ascending."""
    _check_order(nu)
    if count < 1:
        raise ValueError(f"Zero count must be >= 1, got {count}")
    brackets = _brackets(nu, count=count)
    return tuple(
        _refine(nu, bracket, mcmahon_guess(nu, m))
        for m, bracket in enumerate(brackets, start=1)
    )


def bessel_zeros_below(nu: float, upper: float) -> Tuple[float, ...]:
    """All positive zeros of J_nu not exceeding ``upper``."""
    _check_order(nu)
    if upper <= nu:
        return ()
    count = len(_brackets(nu, upper=upper))
    if count == 0:
        return ()
    return tuple(z for z in bessel_zeros(nu, count) if z <= upper)


def bessel_zero(nu: float, m: int) -> float:
    """The m-th positive zero mu_{nu,m} of J_nu.

    Raises:
        ValueError: If m < 1 or nu < 0
        SolverError: If the zero cannot be located
    """
    if m < 1:
        raise ValueError(f"Zero index must be >= 1, got {m}")
    return bessel_zeros(nu, m)[m - 1]


def count_sign_changes(nu: float, upper: float, step: float = SCAN_STEP) -> int:
    """Sign changes of J_nu on a uniform grid over (0, upper]."""
    grid = np.arange(step, upper + 0.5 * step, step)
    signs = np.sign(special.jv(nu, grid))
    return int(np.sum(signs[:-1] * signs[1:] < 0))

"""Generalized symmetric eigensolvers for A u = lambda M u."""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse.linalg as spla

from config.settings import settings
from core.exceptions import SolverError
from numerics.assembly import AssembledSystem

logger = logging.getLogger(__name__)

# Below this size ARPACK is not worth its overhead.
SMALL_SYSTEM = 64


@dataclass(frozen=True)
class DiscreteSpectrum:
    """Smallest eigenpairs of an assembled system.

    Attributes:
        eigenvalues: (k,) ascending
        eigenvectors: (n_free, k) M-orthonormal columns
        residuals: (k,) backward errors
            |A u - lambda M u| / ((|A| + |lambda| |M|) |u|), Frobenius matrix norms
        method: 'shift-invert' or 'dense'
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    method: str

    @property
    def count(self) -> int:
        return self.eigenvalues.size

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(np.maximum(self.eigenvalues, 0.0))

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0


def _finalize(system: AssembledSystem, values, vectors, method: str) -> DiscreteSpectrum:
    """Sort, M-normalize and attach residuals."""
    order = np.argsort(values, kind='stable')
    values = np.asarray(values)[order]
    vectors = np.asarray(vectors)[:, order]

    A, M = system.stiffness, system.mass
    norms = np.sqrt(np.einsum('ik,ik->k', vectors, M @ vectors))
    vectors = vectors / norms

    # Fix the sign so that the largest-magnitude entry is positive.
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    vectors = vectors * np.where(signs == 0, 1.0, signs)

    res = np.linalg.norm(A @ vectors - (M @ vectors) * values, axis=0)
    scale = (spla.norm(A) + np.abs(values) * spla.norm(M)) * np.linalg.norm(vectors, axis=0)
    residuals = res / np.where(scale > 0, scale, 1.0)

    return DiscreteSpectrum(values, vectors, residuals, method)


def _dense(system: AssembledSystem, n_ev: int = None):
    """LAPACK generalized eigensolve.

    The lowest ``n_ev`` pairs come from the reversed pencil M v = theta A v,
    lambda = 1 / theta, whenever A is positive definite. Strongly graded
    meshes put eigenvalues near 1e20 at the top of the spectrum.
    """
    A = system.stiffness.toarray()
    M = system.mass.toarray()
    n = A.shape[0]
    if n_ev is not None:
        try:
            thetas, vectors = la.eigh(M, A, subset_by_index=[n - n_ev, n - 1])
        except la.LinAlgError:
            logger.debug("Stiffness matrix not positive definite; solving A u = lambda M u")
        else:
            if np.all(thetas > 0):
                return 1.0 / thetas, vectors
    subset = None if n_ev is None else [0, n_ev - 1]
    try:
        return la.eigh(A, M, subset_by_index=subset)
    except la.LinAlgError as e:
        logger.error(f"Dense generalized eigensolve failed: {e}")
        raise SolverError(f"Dense eigensolve failed (mass matrix not SPD?): {e}") from e


def _solve_dense(system: AssembledSystem, n_ev: int) -> DiscreteSpectrum:
    values, vectors = _dense(system, n_ev)
    return _finalize(system, values, vectors, 'dense')


def _shift_invert(system: AssembledSystem, n_ev: int, tol: float, max_retries: int, sigma: float):
    """ARPACK in shift-invert mode with retries on non-convergence.

    Returns None when every attempt failed.
    """
    A = system.stiffness.tocsc()
    M = system.mass.tocsc()
    n = A.shape[0]

    try:
        lu = spla.splu((A - sigma * M).tocsc())
    except RuntimeError as e:
        logger.warning(f"Sparse factorization of A - {sigma} M failed: {e}")
        return None

    op_inv = spla.LinearOperator(A.shape, matvec=lu.solve, dtype=float)
    v0 = np.random.default_rng(settings.RANDOM_SEED).standard_normal(n)

    for attempt in range(max_retries):
        ncv = min(n, max(2 * n_ev + 1, 20) * 2 ** attempt)
        maxiter = int(10 * n_ev * np.sqrt(n)) * 2 ** attempt
        try:
            values, vectors = spla.eigsh(
                A, k=n_ev, M=M, sigma=sigma, which='LM', OPinv=op_inv,
                v0=v0, ncv=ncv, maxiter=maxiter, tol=tol,
            )
        except spla.ArpackNoConvergence:
            logger.warning(
                f"Eigensolver did not converge (ncv={ncv}, maxiter={maxiter}). "
                f"Retrying (attempt {attempt + 1}/{max_retries})"
            )
            continue
        except spla.ArpackError as e:
            logger.warning(f"ARPACK error: {e} (attempt {attempt + 1}/{max_retries})")
            continue

        # One block inverse iteration followed by Rayleigh-Ritz.
        X = lu.solve(np.asarray(M @ vectors))
        Ar = X.T @ (A @ X)
        Mr = X.T @ (M @ X)
        values, coeffs = la.eigh(0.5 * (Ar + Ar.T), 0.5 * (Mr + Mr.T))
        return values, X @ coeffs

    logger.error(f"Eigensolver failed after {max_retries} attempts")
    return None


def solve(
    system: AssembledSystem,
    n_ev: int,
    tol: float = None,
    max_retries: int = None,
    sigma: float = 0.0,
) -> DiscreteSpectrum:
    """Compute the ``n_ev`` smallest eigenpairs of A u = lambda M u.

    Args:
        system: Assembled stiffness/mass pair
        n_ev: Number of eigenpairs
        tol: Backward error tolerance (defaults to settings.EIGEN_TOLERANCE)
        max_retries: Attempts of the sparse solver before the dense fallback
        sigma: Shift for the shift-invert transform

    Raises:
        ValueError: If n_ev is not in [1, free DOFs]
        SolverError: If the sparse solver fails and the dense fallback is too large,
            or if the final backward error exceeds ``tol``
    """
    tol = tol if tol is not None else settings.EIGEN_TOLERANCE
    max_retries = max_retries or settings.EIGEN_MAX_RETRIES
    n = system.num_free
    if not 1 <= n_ev <= n:
        raise ValueError(f"Requested {n_ev} eigenpairs of a system with {n} free DOFs")

    # Large fractions of the spectrum go straight to LAPACK.
    if n <= SMALL_SYSTEM or n_ev >= n - 1 or (4 * n_ev > n and n <= settings.DENSE_SIZE_LIMIT):
        spectrum = _solve_dense(system, n_ev)
    else:
        result = _shift_invert(system, n_ev, tol, max_retries, sigma)
        spectrum = None if result is None else _finalize(system, *result, 'shift-invert')
        if spectrum is None or spectrum.max_residual > tol:
            if n > settings.DENSE_SIZE_LIMIT:
                raise SolverError(
                    f"Sparse eigensolver failed and {n} DOFs exceed the dense limit "
                    f"{settings.DENSE_SIZE_LIMIT}"
                )
            if spectrum is not None:
                logger.warning(
                    f"Shift-invert backward error {spectrum.max_residual:.3e} exceeds {tol:.1e}"
                )
            logger.warning(f"Falling back to dense eigensolver for {n} DOFs")
            spectrum = _solve_dense(system, n_ev)

    if spectrum.max_residual > tol:
        logger.error(
            f"Largest backward error {spectrum.max_residual:.3e} exceeds tolerance {tol:.1e}"
        )
        raise SolverError(
            f"Eigenpairs not accurate: backward error {spectrum.max_residual:.3e} > {tol:.1e}"
        )
    logger.info(
        f"Computed {n_ev} eigenpairs ({spectrum.method}), "
        f"lambda_1={spectrum.eigenvalues[0]:.12g}"
    )
    return spectrum


def solve_full(system: AssembledSystem) -> DiscreteSpectrum:
    """All eigenpairs by a dense solve.

    Raises:
        SolverError: If the system exceeds settings.DENSE_SIZE_LIMIT
    """
    n = system.num_free
    if n > settings.DENSE_SIZE_LIMIT:
        logger.error(f"Full spectrum requested for {n} DOFs")
        raise SolverError(
            f"Full spectrum of {n} DOFs exceeds the dense limit {settings.DENSE_SIZE_LIMIT}"
        )
    spectrum = _solve_dense(system, None)
    logger.info(f"Computed full spectrum of {n} DOFs")
    return spectrum

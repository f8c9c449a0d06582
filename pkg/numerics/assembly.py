"""Quadrature assembly of the stiffness and mass matrices.

Entries are quadrature sums over the Bezier elements,

    A[i, j] = sum_k sum_l grad N_i(x_lk) . grad N_j(x_lk) w_lk,
    M[i, j] = sum_k sum_l N_i(x_lk) N_j(x_lk) w_lk,

with no exact integration anywhere, so basis functions that are not in H1
near the vertex still give finite entries.
"""

import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import scipy.sparse as sp

from core.exceptions import QuadratureError
from numerics.element_evaluator import ElementChunk, chunk_ranges, evaluate_elements
from numerics.quadrature import QuadratureRule
from services.parallel_runner import ParallelRunner

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssembledSystem:
    """Stiffness/mass pair restricted to the free DOFs.

    Attributes:
        stiffness: CSR matrix A over free DOFs
        mass: CSR matrix M over free DOFs
        free_dofs: Space DOF index of every matrix row
        num_space_dofs: Size of the unconstrained space
        masked: Whether Dirichlet DOFs were removed
    """

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    free_dofs: np.ndarray
    num_space_dofs: int
    masked: bool = True

    @property
    def num_free(self) -> int:
        return self.free_dofs.size

    def expand(self, vectors: np.ndarray) -> np.ndarray:
        """Embed free-DOF vectors (n_free,) or (n_free, m) into the full space."""
        vectors = np.asarray(vectors)
        full = np.zeros((self.num_space_dofs,) + vectors.shape[1:], dtype=vectors.dtype)
        full[self.free_dofs] = vectors
        return full


def _element_triplets(chunk: ElementChunk, remap: np.ndarray):
    """Element matrices of one chunk flattened to (row, col, a, m) triplets."""
    local = remap[chunk.indices]
    n_loc = local.shape[1]

    k_el = np.einsum('eqad,eqbd,eq->eab', chunk.gradients, chunk.gradients, chunk.weights,
                     optimize=True)
    m_el = np.einsum('eqa,eqb,eq->eab', chunk.values, chunk.values, chunk.weights,
                     optimize=True)

    rows = np.repeat(local, n_loc, axis=1).ravel()
    cols = np.tile(local, (1, n_loc)).ravel()
    keep = (rows >= 0) & (cols >= 0)
    return rows[keep], cols[keep], k_el.ravel()[keep], m_el.ravel()[keep]


def assemble(
    space,
    geo,
    rule: QuadratureRule = None,
    apply_mask: bool = True,
    chunk_size: int = None,
    max_workers: int = None,
) -> AssembledSystem:
    """Assemble the quadrature stiffness and mass matrices of ``space``.

    Args:
        space: Tensor or hierarchical space built on ``geo``
        geo: Geometry whose Jacobian pulls gradients back
        rule: Quadrature rule (defaults to settings.QUADRATURE_POINTS)
        apply_mask: Remove the Dirichlet DOFs on the circular edge
        chunk_size: Elements per evaluation chunk
        max_workers: Threads used for the element chunks

    Returns:
        AssembledSystem with CSR matrices over the free DOFs

    Raises:
        QuadratureError: If a non-finite entry is produced
    """
    rule = rule or QuadratureRule()
    n = space.num_dofs
    constrained = space.dirichlet_mask() if apply_mask else np.zeros(n, dtype=bool)
    free = np.flatnonzero(~constrained)

    # Extra trailing slot so padded index -1 maps to -1.
    remap = np.full(n + 1, -1, dtype=int)
    remap[free] = np.arange(free.size)

    chunks = chunk_ranges(space.mesh.num_elements, chunk_size)
    runner = ParallelRunner(max_workers)
    results = runner.run(
        list(range(len(chunks))),
        lambda c: _element_triplets(evaluate_elements(space, geo, rule, chunks[c]), remap),
        label='assembly chunks',
    )
    runner.raise_first_error(results)

    # Fixed reduction order: chunk order, then element order within a chunk.
    parts = [results[c] for c in range(len(chunks))]
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    a_vals = np.concatenate([p[2] for p in parts])
    m_vals = np.concatenate([p[3] for p in parts])

    if not (np.all(np.isfinite(a_vals)) and np.all(np.isfinite(m_vals))):
        logger.error("Non-finite matrix entries after assembly")
        raise QuadratureError("Assembly produced non-finite matrix entries")

    shape = (free.size, free.size)
    stiffness = sp.coo_matrix((a_vals, (rows, cols)), shape=shape).tocsr()
    mass = sp.coo_matrix((m_vals, (rows, cols)), shape=shape).tocsr()
    # Element matrices from BLAS contractions can differ from symmetric in the last bit.
    stiffness = ((stiffness + stiffness.T) * 0.5).tocsr()
    mass = ((mass + mass.T) * 0.5).tocsr()
    stiffness.sort_indices()
    mass.sort_indices()

    system = AssembledSystem(stiffness, mass, free, n, apply_mask)
    logger.info(
        f"Assembled {free.size} free DOFs of {n} on {space.mesh.num_elements} elements, "
        f"nnz={stiffness.nnz}"
    )
    return system


def system_stats(system: AssembledSystem) -> Dict[str, int]:
    """DOF count, nonzeros and bandwidth of the assembled pair."""
    coo = system.stiffness.tocoo()
    bandwidth = int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0
    row_nnz = np.diff(system.stiffness.indptr)
    return {
        'dofs': system.num_free,
        'space_dofs': system.num_space_dofs,
        'nnz': int(system.stiffness.nnz),
        'max_row_nnz': int(row_nnz.max()) if row_nnz.size else 0,
        'bandwidth': bandwidth,
    }

"""Pairing of discrete eigenvalues with exact eigenpairs."""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

logger = logging.getLogger(__name__)

# Relative gap below which neighbouring eigenvalues form one cluster.
CLUSTER_GAP = 1e-8


def _as_values(spectrum) -> np.ndarray:
    if hasattr(spectrum, 'eigenvalues'):
        return np.asarray(spectrum.eigenvalues, dtype=float)
    items = list(spectrum)
    if items and hasattr(items[0], 'eigenvalue'):
        return np.array([item.eigenvalue for item in items])
    return np.asarray(items, dtype=float)


def clusters(values: np.ndarray, gap: float = CLUSTER_GAP) -> List[Tuple[int, int]]:
    """Half-open index ranges [start, stop) of near-equal ascending values."""
    values = np.asarray(values, dtype=float)
    blocks = []
    start = 0
    for i in range(1, values.size + 1):
        if i == values.size:
            blocks.append((start, i))
            break
        scale = max(abs(values[i]), abs(values[i - 1]), np.finfo(float).tiny)
        if (values[i] - values[i - 1]) / scale >= gap:
            blocks.append((start, i))
            start = i
    return blocks


def match_spectra(
    discrete,
    exact,
    similarity: Optional[Callable[[int, int], float]] = None,
    gap: float = CLUSTER_GAP,
) -> List[Tuple[int, int]]:
    """Pair discrete and exact eigenvalues by rank.

    Ranks falling into a cluster of either sequence are matched as a block;
    inside a block the assignment maximizes the total |similarity| (usually
    an L2_h cosine). Without a similarity function blocks keep rank order.

    Args:
        discrete: DiscreteSpectrum or ascending eigenvalues
        exact: ExactEigenpair list or ascending eigenvalues
        similarity: Callable (discrete index, exact index) -> cosine
        gap: Relative gap defining clusters

    Returns:
        List of (discrete index, exact index) pairs, ordered by discrete index
    """
    lam_h = _as_values(discrete)
    lam = _as_values(exact)
    n = min(lam_h.size, lam.size)
    if n == 0:
        return []

    # Union of the cluster structures of both sequences.
    joined = np.zeros(n, dtype=bool)
    for values in (lam_h[:n], lam[:n]):
        for start, stop in clusters(values, gap):
            joined[start + 1:stop] = True

    pairs = []
    start = 0
    for i in range(1, n + 1):
        if i < n and joined[i]:
            continue
        block = list(range(start, i))
        if len(block) > 1 and similarity is not None:
            cost = np.array([[-abs(similarity(a, b)) for b in block] for a in block])
            rows, cols = linear_sum_assignment(cost)
            pairs.extend((block[r], block[c]) for r, c in zip(rows, cols))
            logger.info(f"Matched cluster of {len(block)} eigenvalues at ranks {block[0]}..{block[-1]}")
        else:
            pairs.extend((j, j) for j in block)
        start = i

    pairs.sort()
    return pairs


def matched_exact_index(pairs: Sequence[Tuple[int, int]], exact_index: int) -> Optional[int]:
    """Discrete index paired with ``exact_index``, or None."""
    for d, e in pairs:
        if e == exact_index:
            return d
    return None

"""Feature projection: truncated SVD plus the two row normalizations.

The raw feature matrix is reduced to ``min(rank, n, d)`` columns via a
truncated singular value decomposition of the uncentered matrix, keeping
``U_r @ diag(s_r)``. Small inputs (``min(n, d) <= 64``) use an exact dense
SVD; larger ones use a seeded randomized range finder with 4 power iterations
and oversampling 10. Either way each left singular vector is sign-fixed so
its largest-magnitude entry is positive, which makes the output reproducible
across both code paths.

Downstream the projected rows are L1-normalized (giving the comparison
features) and then L2-normalized into unit directions for cosine work. Rows
with norm below 1e-15 stay exactly zero in both forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import GraphInputError
from .graph import AttributedGraph

EXACT_SVD_LIMIT = 64
ZERO_ROW_TOL = 1e-15

_OVERSAMPLE = 10
_POWER_ITERS = 4


@dataclass
class ProjectedFeatures:
    """Projected feature matrix together with its normalized companions.

    Attributes
    ----------
    projected : ndarray of shape (n, rank_used)
        ``U_r @ diag(s_r)`` rows.
    normalized : ndarray
        Rows of ``projected`` scaled to unit L1 norm (zero rows stay zero).
    directions : ndarray
        Rows of ``normalized`` scaled to unit L2 norm (zero rows stay zero).
    rank_used : int
        Actual number of retained components, ``min(rank, n, d)``.
    seed : int
        Seed that drove the randomized path (recorded even when the exact
        path ran, for provenance).
    """

    projected: np.ndarray
    normalized: np.ndarray
    directions: np.ndarray
    rank_used: int
    seed: int


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    """Flip columns in place so each column's max-|.| entry is positive."""
    if basis.size == 0:
        return basis
    anchor = np.argmax(np.abs(basis), axis=0)
    signs = np.sign(basis[anchor, np.arange(basis.shape[1])])
    signs[signs == 0] = 1.0
    basis *= signs
    return basis


def _randomized_basis(matrix: np.ndarray, n_components: int,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    n, d = matrix.shape
    n_probe = min(n_components + _OVERSAMPLE, min(n, d))
    sketch = matrix @ rng.standard_normal((d, n_probe))
    q, _ = np.linalg.qr(sketch)
    for _ in range(_POWER_ITERS):
        # re-orthonormalize at each half step to keep the basis stable
        q, _ = np.linalg.qr(matrix.T @ q)
        q, _ = np.linalg.qr(matrix @ q)
    small = q.T @ matrix
    u_small, s, _ = np.linalg.svd(small, full_matrices=False)
    return q @ u_small, s


def truncated_svd(matrix: np.ndarray, rank: int, seed: int = 0) -> np.ndarray:
    """Project ``matrix`` onto its top singular directions.

    Returns ``U_k @ diag(s_k)`` with ``k = min(rank, n, d)``. No centering is
    applied. Deterministic for a fixed seed.
    """
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise GraphInputError("expected a non-empty 2-d matrix")
    if not np.all(np.isfinite(matrix)):
        raise GraphInputError("matrix contains non-finite values")
    if rank < 1:
        raise GraphInputError(f"rank must be >= 1, got {rank}")
    n, d = matrix.shape
    k = min(rank, n, d)
    if min(n, d) <= EXACT_SVD_LIMIT:
        u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    else:
        u, s = _randomized_basis(matrix, k, np.random.default_rng(seed))
    u = np.ascontiguousarray(u[:, :k])
    s = s[:k]
    _fix_signs(u)
    return u * s


def l1_normalize_rows(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit L1 norm; rows with norm < 1e-15 become zero."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.abs(matrix).sum(axis=1)
    out = np.zeros_like(matrix)
    keep = norms >= ZERO_ROW_TOL
    out[keep] = matrix[keep] / norms[keep, None]
    return out


def unit_directions(matrix: np.ndarray) -> np.ndarray:
    """Scale each row to unit L2 norm; rows with norm < 1e-15 become zero."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    out = np.zeros_like(matrix)
    keep = norms >= ZERO_ROW_TOL
    out[keep] = matrix[keep] / norms[keep, None]
    return out


def build_projected(projected: np.ndarray, seed: int = 0) -> ProjectedFeatures:
    """Wrap an already-projected matrix with its normalized companions."""
    projected = np.asarray(projected, dtype=np.float64)
    normalized = l1_normalize_rows(projected)
    return ProjectedFeatures(
        projected=projected,
        normalized=normalized,
        directions=unit_directions(normalized),
        rank_used=projected.shape[1],
        seed=seed,
    )


def project(graph: AttributedGraph, rank: int = 8,
            seed: int = 0) -> ProjectedFeatures:
    """Project a graph's features and attach both normalizations."""
    return build_projected(truncated_svd(graph.features, rank, seed), seed=seed)

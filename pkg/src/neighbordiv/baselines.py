"""Training-free heuristic scorers used as comparison baselines.

Four raw per-node heuristics, each pushed through the same calibration
chain as the diversity score so that differences reflect the raw signal,
not the post-processing:

``lcc``
    Local clustering coefficient: triangles around a node over the possible
    neighbor pairs. Undefined below degree two.
``nrs``
    Neighborhood reconstruction residual: L2 distance between a node's
    normalized features and its symmetric-normalized neighbor aggregate.
``pcd``
    Propagation cosine decay: weighted sum over hops of one minus the
    cosine between consecutive propagated representations.
``amen``
    Ego-network normality in the spirit of attribute-aware community
    scoring: internal modularity-weighted feature agreement minus boundary
    agreement; the sign is flipped so high means anomalous.

Feature-based heuristics consume the L1-normalized projected matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .calibration import AnomalyScores, CalibrationConfig, calibrate_values
from .graph import AttributedGraph
from .projection import ProjectedFeatures

KINDS = ("lcc", "nrs", "pcd", "amen")


@dataclass
class HeuristicKind:
    """Which heuristic to run, plus the propagation-decay knobs."""

    kind: str
    pcd_hops: int = 3
    pcd_weights: tuple[float, ...] = (1.0, 0.7, 0.5)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.pcd_hops < 1:
            raise ValueError("pcd_hops must be >= 1")
        if len(self.pcd_weights) != self.pcd_hops:
            raise ValueError("pcd_weights length must equal pcd_hops")


@dataclass
class RawHeuristicScores:
    """Raw heuristic values; NaN exactly where ``valid_mask`` is False."""

    values: np.ndarray
    valid_mask: np.ndarray


def _sym_normalized_adjacency(graph: AttributedGraph) -> sparse.csr_matrix:
    """D^-1/2 A D^-1/2 with degrees clamped to at least one."""
    inv_sqrt = 1.0 / np.sqrt(np.maximum(graph.degrees, 1))
    row_idx = np.repeat(np.arange(graph.node_count), graph.degrees)
    data = inv_sqrt[row_idx] * inv_sqrt[graph.neighbors]
    return sparse.csr_matrix(
        (data, graph.neighbors, graph.offsets),
        shape=(graph.node_count, graph.node_count),
    )


def _row_cosine(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cosine, zero whenever either row (or the product norm) is zero."""
    num = np.einsum("ij,ij->i", a, b)
    denom = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    out = np.zeros(a.shape[0])
    ok = denom > 0
    out[ok] = np.clip(num[ok] / denom[ok], -1.0, 1.0)
    return out


def local_clustering(graph: AttributedGraph) -> RawHeuristicScores:
    """Triangle density among each node's neighbors; NaN below degree two."""
    n = graph.node_count
    degrees = graph.degrees
    valid = degrees >= 2
    values = np.full(n, np.nan)
    for node in np.flatnonzero(valid):
        nbrs = graph.neighbors_of(node)
        # each neighbor-neighbor edge is seen from both endpoints
        twice_links = 0
        for p in nbrs:
            twice_links += np.intersect1d(
                graph.neighbors_of(int(p)), nbrs, assume_unique=True
            ).size
        d = degrees[node]
        values[node] = twice_links / (d * (d - 1))
    return RawHeuristicScores(values=values, valid_mask=valid)


def neighbor_residual(graph: AttributedGraph,
                      normalized: np.ndarray) -> RawHeuristicScores:
    """Distance between each node's features and its aggregated neighborhood."""
    aggregate = _sym_normalized_adjacency(graph) @ normalized
    values = np.linalg.norm(normalized - aggregate, axis=1)
    valid = graph.degrees >= 1
    values[~valid] = np.nan
    return RawHeuristicScores(values=values, valid_mask=valid)


def propagation_decay(graph: AttributedGraph, normalized: np.ndarray,
                      cfg: HeuristicKind) -> RawHeuristicScores:
    """Accumulated cosine drift across propagation hops."""
    adjacency = _sym_normalized_adjacency(graph)
    current = normalized
    values = np.zeros(graph.node_count)
    for weight in cfg.pcd_weights:
        nxt = adjacency @ current
        values += weight * (1.0 - _row_cosine(current, nxt))
        current = nxt
    valid = graph.degrees >= 1
    values[~valid] = np.nan
    return RawHeuristicScores(values=values, valid_mask=valid)


def ego_normality(graph: AttributedGraph,
                  normalized: np.ndarray) -> RawHeuristicScores:
    """Negated ego-network normality; NaN below degree two.

    Internal agreement sums ``(A_pq - k_p k_q / 2m)`` weighted feature
    products over ordered pairs of the closed neighborhood; external
    agreement penalizes boundary edges by the complementary null weight.
    Both parts are rescaled into fixed ranges before combining, and the
    normality norm is taken over positive entries only (falling back to the
    maximum entry when nothing is positive).
    """
    n = graph.node_count
    degrees = graph.degrees.astype(np.float64)
    twom = max(1.0, 2.0 * graph.edge_count)

    col_min = normalized.min(axis=0)
    col_range = normalized.max(axis=0) - col_min
    scale = np.where(col_range > 0, col_range, 1.0)
    xhat = (normalized - col_min) / scale
    xhat[:, col_range == 0] = 0.0

    valid = graph.degrees >= 2
    values = np.full(n, np.nan)
    for node in np.flatnonzero(valid):
        ego = np.sort(np.concatenate([[node], graph.neighbors_of(node)]))
        internal = np.zeros(xhat.shape[1])
        external = np.zeros(xhat.shape[1])
        for p in ego:
            nbrs_p = graph.neighbors_of(int(p))
            inside = np.isin(nbrs_p, ego, assume_unique=True)
            members = nbrs_p[inside]
            if members.size:
                internal += xhat[p] * xhat[members].sum(axis=0)
            outside = nbrs_p[~inside]
            if outside.size:
                null = np.minimum(1.0, degrees[p] * degrees[outside] / twom)
                external -= xhat[p] * ((1.0 - null)[:, None] * xhat[outside]).sum(axis=0)
        weighted_deg = degrees[ego] @ xhat[ego]
        internal -= weighted_deg * weighted_deg / twom

        internal = np.clip(internal / max(1.0, np.abs(internal).max()), 0.0, 1.0)
        external = np.clip(external / max(1.0, np.abs(external).max()), -1.0, 0.0)
        combined = internal + external
        positive = combined[combined > 0]
        normality = float(np.sqrt((positive ** 2).sum())) if positive.size \
            else float(combined.max())
        values[node] = -normality
    return RawHeuristicScores(values=values, valid_mask=valid)


def raw_heuristic(graph: AttributedGraph, projected: ProjectedFeatures,
                  cfg: HeuristicKind) -> RawHeuristicScores:
    """Dispatch to one of the raw heuristics by kind."""
    if cfg.kind == "lcc":
        return local_clustering(graph)
    if cfg.kind == "nrs":
        return neighbor_residual(graph, projected.normalized)
    if cfg.kind == "pcd":
        return propagation_decay(graph, projected.normalized, cfg)
    return ego_normality(graph, projected.normalized)


def calibrate_heuristic(raw: RawHeuristicScores,
                        cfg: CalibrationConfig | None = None) -> AnomalyScores:
    """Run a raw heuristic through the shared calibration chain."""
    return calibrate_values(raw.values, raw.valid_mask, cfg)

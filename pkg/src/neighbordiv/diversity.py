"""Per-node neighborhood diversity from pairwise neighbor similarities.

For a node with neighbors ``j_1..j_d`` (``d >= 2``), take the unit direction
of each neighbor's normalized projected features and compute cosine
similarities over neighbor pairs. The node's diversity value is a dispersion
statistic of those similarities, population variance by default. Nodes with
fewer than two neighbors have no pair and therefore no defined value.

Pair enumeration uses one canonical order everywhere: pairs ``(p, q)`` with
``p < q`` are indexed by ``m = q(q-1)/2 + p``. The full computation walks
``m = 0..C(d,2)-1``; Monte Carlo mode draws ``min(k, C(d,2))`` flat indices
without replacement using a per-node seeded stream, so a budget of at least
``C(d,2)`` reproduces the full result bit for bit and no node's draw depends
on traversal order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import run_chunked, worker_count
from .graph import AttributedGraph
from .projection import ProjectedFeatures

STATISTICS = ("variance", "std_dev", "mean", "entropy")

# below this many valid nodes, threading overhead cannot pay off
_MIN_PARALLEL_NODES = 256


@dataclass
class DiversityConfig:
    """Knobs for the diversity computation.

    ``sampling_budget=None`` evaluates every neighbor pair; an integer ``k``
    evaluates ``min(k, C(d,2))`` sampled pairs per node. ``entropy_bins``
    only matters for the entropy statistic. ``master_seed`` drives the
    per-node sampling streams.
    """

    statistic: str = "variance"
    sampling_budget: int | None = None
    entropy_bins: int = 10
    master_seed: int = 0

    def __post_init__(self):
        if self.statistic not in STATISTICS:
            raise ValueError(
                f"statistic must be one of {STATISTICS}, got {self.statistic!r}"
            )
        if self.sampling_budget is not None and self.sampling_budget < 1:
            raise ValueError("sampling_budget must be a positive integer or None")
        if self.entropy_bins < 1:
            raise ValueError("entropy_bins must be >= 1")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")


@dataclass
class DiversityScores:
    """Diversity values with validity bookkeeping.

    ``values[i]`` is NaN exactly where ``valid_mask[i]`` is False.
    ``pairs_evaluated[i]`` counts the similarity pairs behind value ``i``.
    """

    values: np.ndarray
    valid_mask: np.ndarray
    pairs_evaluated: np.ndarray


def pair_count(d: int) -> int:
    """Number of unordered pairs among ``d`` items."""
    if d < 0:
        raise ValueError("d must be non-negative")
    return d * (d - 1) // 2


def pair_index(p: int, q: int) -> int:
    """Flat index of the pair ``(p, q)``, requiring ``0 <= p < q``."""
    if not 0 <= p < q:
        raise ValueError(f"need 0 <= p < q, got ({p}, {q})")
    return q * (q - 1) // 2 + p


def pair_from_index(m: int) -> tuple[int, int]:
    """Inverse of :func:`pair_index`."""
    if m < 0:
        raise ValueError("pair index must be non-negative")
    p, q = _flat_to_pairs(np.asarray([m], dtype=np.int64))
    return int(p[0]), int(q[0])


def _flat_to_pairs(flat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # invert m = q(q-1)/2 + p; the float sqrt can be off by one, so correct
    q = ((1.0 + np.sqrt(1.0 + 8.0 * flat.astype(np.float64))) / 2.0).astype(np.int64)
    q = np.where(q * (q - 1) // 2 > flat, q - 1, q)
    q = np.where((q + 1) * q // 2 <= flat, q + 1, q)
    p = flat - q * (q - 1) // 2
    return p, q


def _floyd_sample(total: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform k-subset of ``range(total)`` in O(k) time and space."""
    base = total - k
    draws = rng.integers(0, np.arange(base + 1, total + 1))
    chosen: set[int] = set()
    out = np.empty(k, dtype=np.int64)
    for j in range(k):
        t = int(draws[j])
        if t in chosen:
            t = base + j
        chosen.add(t)
        out[j] = t
    return out


def sample_pairs(d: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``min(k, C(d,2))`` distinct pairs ``(p, q)`` with ``p < q < d``.

    Every k-subset of pairs is equally likely. When ``k`` covers all pairs
    the full enumeration is returned in canonical flat-index order.
    """
    if d < 2:
        raise ValueError(f"need d >= 2 to form pairs, got {d}")
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    total = pair_count(d)
    if k >= total:
        flat = np.arange(total, dtype=np.int64)
    else:
        flat = _floyd_sample(total, k, rng)
    p, q = _flat_to_pairs(flat)
    return np.column_stack([p, q])


def pairwise_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two unit-or-zero rows, clamped to [-1, 1]."""
    return float(np.clip(np.dot(u, v), -1.0, 1.0))


def dispersion_statistic(values: np.ndarray, cfg: DiversityConfig) -> float:
    """Reduce a non-empty similarity sample to one dispersion number."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot reduce an empty similarity sample")
    if cfg.statistic == "mean":
        return float(values.mean())
    if cfg.statistic in ("variance", "std_dev"):
        center = values.mean()
        variance = float(np.mean((values - center) ** 2))
        return variance if cfg.statistic == "variance" else float(np.sqrt(variance))
    counts, _ = np.histogram(values, bins=cfg.entropy_bins, range=(-1.0, 1.0))
    probs = counts[counts > 0] / values.size
    return float(-(probs * np.log(probs)).sum())


def _node_rng(master_seed: int, node: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, node]))


def _node_flat_indices(d: int, node: int, cfg: DiversityConfig) -> np.ndarray:
    total = pair_count(d)
    k = cfg.sampling_budget
    if k is None or k >= total:
        return np.arange(total, dtype=np.int64)
    return _floyd_sample(total, k, _node_rng(cfg.master_seed, node))


def neighbor_diversity(graph: AttributedGraph, projected: ProjectedFeatures,
                       node: int, cfg: DiversityConfig) -> float | None:
    """Diversity value of one node, or None when its degree is below two."""
    nbrs = graph.neighbors_of(node)
    if len(nbrs) < 2:
        return None
    value, _ = _evaluate_node(nbrs, projected.directions, node, cfg)
    return value


def _evaluate_node(nbrs: np.ndarray, directions: np.ndarray, node: int,
                   cfg: DiversityConfig) -> tuple[float, int]:
    flat = _node_flat_indices(len(nbrs), node, cfg)
    p, q = _flat_to_pairs(flat)
    dirs = directions[nbrs]
    sims = np.einsum("ij,ij->i", dirs[p], dirs[q])
    np.clip(sims, -1.0, 1.0, out=sims)
    return dispersion_statistic(sims, cfg), len(sims)


def diversity_all(graph: AttributedGraph, projected: ProjectedFeatures,
                  cfg: DiversityConfig, n_workers: int | None = None) -> DiversityScores:
    """Diversity values for every node; NaN where the degree is below two.

    ``n_workers=None`` reads the thread count from the environment. Results
    are identical for any worker count.
    """
    n = graph.node_count
    degrees = graph.degrees
    valid = degrees >= 2
    values = np.full(n, np.nan)
    npairs = np.zeros(n, dtype=np.int64)
    todo = np.flatnonzero(valid)

    directions = projected.directions
    offsets, neighbors = graph.offsets, graph.neighbors

    def work(chunk):
        for node in chunk:
            nbrs = neighbors[offsets[node]:offsets[node + 1]]
            values[node], npairs[node] = _evaluate_node(nbrs, directions, node, cfg)

    workers = worker_count() if n_workers is None else max(1, int(n_workers))
    if len(todo) < _MIN_PARALLEL_NODES:
        workers = 1
    run_chunked(work, np.array_split(todo, workers * 4), workers)
    return DiversityScores(values=values, valid_mask=valid, pairs_evaluated=npairs)

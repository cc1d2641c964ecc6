"""Synthetic attributed stochastic block model with planted anomalies.

Communities are equal-sized blocks; edge probabilities inside and across
blocks are solved from a target average degree and a target homophily level
(the expected fraction of edges that stay inside a community). Features are
Gaussian community centers plus unit noise.

Anomalies rewire a node's edges while preserving its degree:

``type_h``
    Neighbors resampled without replacement from the node's own community.
    The node keeps homophilic structure but loses its organic neighborhood.
``type_d``
    Each neighbor slot independently picks a uniform community (own included)
    and then a uniform member, giving a diverse, mixed neighborhood.
``mixed``
    Equal numbers of both, sharing one eligible-node draw.

Anomalies are drawn among nodes of degree at least two, anomalous nodes are
excluded from every candidate pool so each planted node keeps its exact
original degree, and the reported homophily is measured before injection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diversity import _flat_to_pairs, pair_count
from .exceptions import DegenerateGraphError, InfeasibleSpecError
from .graph import AttributedGraph, build_graph

ANOMALY_TYPES = ("type_h", "type_d", "mixed")

_PROB_SLACK = 1e-9


@dataclass
class SyntheticSpec:
    """Benchmark parameters; defaults mirror the standard sweep setup."""

    target_homophily: float
    n: int = 2000
    communities: int = 5
    avg_degree: float = 15.0
    feature_dim: int = 50
    center_variance: float = 9.0
    noise_variance: float = 1.0
    anomaly_type: str = "mixed"
    anomalies_per_type: int = 50
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.target_homophily <= 1.0:
            raise InfeasibleSpecError("target_homophily must be in [0, 1]")
        if self.communities < 2:
            raise InfeasibleSpecError("need at least two communities")
        if self.n % self.communities != 0:
            raise InfeasibleSpecError(
                f"n={self.n} is not divisible into {self.communities} "
                "equal communities"
            )
        if self.n // self.communities < 2:
            raise InfeasibleSpecError("communities must have at least two members")
        if self.avg_degree <= 0:
            raise InfeasibleSpecError("avg_degree must be positive")
        if self.feature_dim < 1:
            raise InfeasibleSpecError("feature_dim must be >= 1")
        if self.center_variance < 0 or self.noise_variance < 0:
            raise InfeasibleSpecError("variances must be non-negative")
        if self.anomaly_type not in ANOMALY_TYPES:
            raise InfeasibleSpecError(
                f"anomaly_type must be one of {ANOMALY_TYPES}"
            )
        if self.anomalies_per_type < 1:
            raise InfeasibleSpecError("anomalies_per_type must be >= 1")
        if self.seed < 0:
            raise InfeasibleSpecError("seed must be non-negative")


@dataclass
class SyntheticGraph:
    """A generated benchmark graph plus its ground truth.

    ``anomalies`` lists ``(node_id, kind)`` sorted by node id; it is empty
    before injection. ``measured_homophily`` is always the pre-injection
    value, since injection is meant to distort neighborhoods, not the
    graph-level regime being tested.
    """

    graph: AttributedGraph
    measured_homophily: float
    anomalies: list[tuple[int, str]] = field(default_factory=list)

    @property
    def anomaly_ids(self) -> np.ndarray:
        return np.asarray([node for node, _ in self.anomalies], dtype=np.int64)


def sbm_probabilities(spec: SyntheticSpec) -> tuple[float, float]:
    """Within- and across-community edge probabilities for the spec.

    Solves ``p_in = deg * h / (size - 1)`` and
    ``p_out = deg * (1 - h) / (n - size)`` so the expected degree splits into
    an ``h`` fraction of within-community edges. Raises when a probability
    exceeds one beyond rounding slack.
    """
    size = spec.n // spec.communities
    p_in = spec.avg_degree * spec.target_homophily / (size - 1)
    p_out = spec.avg_degree * (1.0 - spec.target_homophily) / (spec.n - size)
    for name, p in (("p_in", p_in), ("p_out", p_out)):
        if p > 1.0 + _PROB_SLACK:
            raise InfeasibleSpecError(
                f"{name}={p:.6g} exceeds 1; lower avg_degree or grow the graph"
            )
    return min(p_in, 1.0), min(p_out, 1.0)


def _stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, purpose]))


def generate_sbm(spec: SyntheticSpec) -> SyntheticGraph:
    """Sample the block-model graph and features, without anomalies."""
    p_in, p_out = sbm_probabilities(spec)
    rng = _stream(spec.seed, 0)
    n, k = spec.n, spec.communities
    size = n // k
    communities = np.repeat(np.arange(k, dtype=np.int64), size)

    centers = rng.normal(0.0, np.sqrt(spec.center_variance),
                         (k, spec.feature_dim))
    features = centers[communities] + rng.normal(
        0.0, np.sqrt(spec.noise_variance), (n, spec.feature_dim))

    blocks: list[np.ndarray] = []
    for c in range(k):
        total = pair_count(size)
        count = rng.binomial(total, p_in)
        if count:
            flat = rng.choice(total, count, replace=False)
            p, q = _flat_to_pairs(np.sort(flat))
            blocks.append(np.column_stack([p, q]) + c * size)
    for a in range(k):
        for b in range(a + 1, k):
            total = size * size
            count = rng.binomial(total, p_out)
            if count:
                flat = np.sort(rng.choice(total, count, replace=False))
                blocks.append(np.column_stack(
                    [flat // size + a * size, flat % size + b * size]))
    edges = np.concatenate(blocks) if blocks else np.empty((0, 2), dtype=np.int64)

    graph = build_graph(edges, features,
                        labels=np.zeros(n, dtype=np.int64),
                        communities=communities)
    return SyntheticGraph(
        graph=graph,
        measured_homophily=homophily_ratio(graph),
        anomalies=[],
    )


def _anomaly_plan(spec: SyntheticSpec) -> list[str]:
    if spec.anomaly_type == "type_h":
        return ["type_h"] * spec.anomalies_per_type
    if spec.anomaly_type == "type_d":
        return ["type_d"] * spec.anomalies_per_type
    return ["type_h"] * spec.anomalies_per_type + \
        ["type_d"] * spec.anomalies_per_type


def inject_anomalies(synthetic: SyntheticGraph,
                     spec: SyntheticSpec) -> SyntheticGraph:
    """Rewire planted nodes, returning a new graph with 0/1 labels.

    Degrees of planted nodes are preserved exactly. Candidate pools exclude
    every planted node, so no anomaly leaks into another's neighborhood.
    """
    rng = _stream(spec.seed, 1)
    graph = synthetic.graph
    n = graph.node_count
    degrees = graph.degrees
    communities = graph.communities
    if communities is None:
        raise InfeasibleSpecError("injection requires community assignments")

    plan = _anomaly_plan(spec)
    eligible = np.flatnonzero(degrees >= 2)
    if len(eligible) < len(plan):
        raise InfeasibleSpecError(
            f"need {len(plan)} nodes of degree >= 2, have {len(eligible)}"
        )
    chosen = list(rng.choice(eligible, len(plan), replace=False))

    # replace picks whose community cannot host their rewired degree
    attempts = 0
    while True:
        anomaly_set = set(int(x) for x in chosen)
        pool_size = np.bincount(communities, minlength=spec.communities).astype(int)
        for node in anomaly_set:
            pool_size[communities[node]] -= 1
        normal_total = n - len(anomaly_set)
        bad = None
        for idx, (node, kind) in enumerate(zip(chosen, plan)):
            need = int(degrees[node])
            if kind == "type_h" and pool_size[communities[node]] < need:
                bad = idx
                break
            if kind == "type_d" and normal_total < need:
                bad = idx
                break
        if bad is None:
            break
        attempts += 1
        if attempts > n:
            raise InfeasibleSpecError(
                "could not place anomalies with degree preserved"
            )
        candidates = np.array(
            [x for x in eligible if int(x) not in anomaly_set], dtype=np.int64)
        if len(candidates) == 0:
            raise InfeasibleSpecError(
                "could not place anomalies with degree preserved"
            )
        chosen[bad] = int(rng.choice(candidates))

    members: list[np.ndarray] = []
    for c in range(spec.communities):
        block = np.flatnonzero(communities == c)
        members.append(np.array(
            [x for x in block if int(x) not in anomaly_set], dtype=np.int64))

    nbr_sets = [set(map(int, graph.neighbors_of(i))) for i in range(n)]
    for node in anomaly_set:
        for u in nbr_sets[node]:
            nbr_sets[u].discard(node)
        nbr_sets[node] = set()

    for node, kind in zip(chosen, plan):
        need = int(degrees[node])
        if kind == "type_h":
            new_nbrs = set(
                int(x) for x in rng.choice(
                    members[communities[node]], need, replace=False))
        else:
            new_nbrs = set()
            guard = 0
            while len(new_nbrs) < need:
                guard += 1
                if guard > 1000 * (need + 10):
                    raise InfeasibleSpecError(
                        "diverse rewiring failed to find distinct neighbors"
                    )
                community = int(rng.integers(spec.communities))
                pool = members[community]
                if len(pool) == 0:
                    continue
                candidate = int(pool[rng.integers(len(pool))])
                if candidate in new_nbrs:
                    continue
                new_nbrs.add(candidate)
        nbr_sets[node] = new_nbrs
        for u in new_nbrs:
            nbr_sets[u].add(node)

    pairs = [(u, v) for u in range(n) for v in nbr_sets[u] if u < v]
    labels = np.zeros(n, dtype=np.int64)
    labels[list(anomaly_set)] = 1
    rewired = build_graph(np.asarray(pairs, dtype=np.int64), graph.features,
                          labels=labels, communities=communities)
    tagged = sorted(zip(map(int, chosen), plan))
    return SyntheticGraph(
        graph=rewired,
        measured_homophily=synthetic.measured_homophily,
        anomalies=[(node, kind) for node, kind in tagged],
    )


def generate(spec: SyntheticSpec) -> SyntheticGraph:
    """Sample a benchmark graph and plant its anomalies."""
    return inject_anomalies(generate_sbm(spec), spec)


def homophily_ratio(graph: AttributedGraph,
                    communities: np.ndarray | None = None) -> float:
    """Fraction of edges joining nodes of the same community."""
    communities = graph.communities if communities is None else communities
    if communities is None:
        raise DegenerateGraphError("no community assignment available")
    if graph.edge_count == 0:
        raise DegenerateGraphError("homophily is undefined on an edgeless graph")
    src = np.repeat(np.arange(graph.node_count), graph.degrees)
    dst = graph.neighbors
    once = src < dst
    same = int((communities[src[once]] == communities[dst[once]]).sum())
    return same / int(once.sum())

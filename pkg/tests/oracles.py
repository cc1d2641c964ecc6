"""Straight-line reference implementations used to cross-check the package.

Everything here is written the slow, obvious way: explicit loops, dense
matrices, fractions for exact rational arithmetic. None of it shares code
with the package; that independence is the point.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

ZERO_TOL = 1e-15


# ---------------------------------------------------------------------------
# adjacency helpers

def adjacency_sets(n: int, edges) -> list[set[int]]:
    nbrs = [set() for _ in range(n)]
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            continue
        nbrs[u].add(v)
        nbrs[v].add(u)
    return nbrs


def dense_adjacency(n: int, edges) -> np.ndarray:
    a = np.zeros((n, n))
    for u, v in edges:
        u, v = int(u), int(v)
        if u != v:
            a[u, v] = 1.0
            a[v, u] = 1.0
    return a


# ---------------------------------------------------------------------------
# projection

def svd_project(matrix: np.ndarray, rank: int) -> np.ndarray:
    """Uncentered truncated SVD scores with deterministic column signs."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n, d = matrix.shape
    k = min(rank, n, d)
    u, s, _ = np.linalg.svd(matrix, full_matrices=False)
    out = np.zeros((n, k))
    for j in range(k):
        col = u[:, j].copy()
        anchor = 0
        for i in range(n):
            if abs(col[i]) > abs(col[anchor]):
                anchor = i
        if col[anchor] < 0:
            col = -col
        out[:, j] = col * s[j]
    return out


def l1_rows(matrix: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(matrix, dtype=np.float64))
    for i, row in enumerate(matrix):
        norm = math.fsum(abs(x) for x in row)
        if norm >= ZERO_TOL:
            out[i] = np.asarray(row, dtype=np.float64) / norm
    return out


def l2_rows(matrix: np.ndarray) -> np.ndarray:
    out = np.zeros_like(np.asarray(matrix, dtype=np.float64))
    for i, row in enumerate(matrix):
        norm = math.sqrt(math.fsum(float(x) * float(x) for x in row))
        if norm >= ZERO_TOL:
            out[i] = np.asarray(row, dtype=np.float64) / norm
    return out


# ---------------------------------------------------------------------------
# dispersion statistics

def variance(sample) -> float:
    sample = [float(x) for x in sample]
    mean = math.fsum(sample) / len(sample)
    return math.fsum((x - mean) ** 2 for x in sample) / len(sample)


def entropy(sample, bins: int) -> float:
    """Histogram entropy over [-1, 1]; the last bin includes its right edge."""
    counts = [0] * bins
    for x in sample:
        if x >= 1.0:
            counts[bins - 1] += 1
            continue
        j = int((float(x) + 1.0) / 2.0 * bins)
        j = min(max(j, 0), bins - 1)
        # float binning can land one bin off near an edge; nudge to match
        # exact edge arithmetic
        while j > 0 and x < -1.0 + 2.0 * j / bins:
            j -= 1
        while j < bins - 1 and x >= -1.0 + 2.0 * (j + 1) / bins:
            j += 1
        counts[j] += 1
    total = len(sample)
    acc = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            acc -= p * math.log(p)
    return acc


def dispersion(sample, statistic: str, bins: int = 10) -> float:
    if statistic == "variance":
        return variance(sample)
    if statistic == "std_dev":
        return math.sqrt(variance(sample))
    if statistic == "mean":
        return math.fsum(float(x) for x in sample) / len(sample)
    return entropy(sample, bins)


# ---------------------------------------------------------------------------
# calibration

def calibrate(values, valid, reference="median", fallback="zero",
              threshold_lambda=1.0) -> dict:
    """Reference -> |deviation| -> z-score -> fallback -> threshold."""
    n = len(valid)
    valid_vals = sorted(float(values[i]) for i in range(n) if valid[i])
    m = len(valid_vals)
    if reference == "median":
        mid = m // 2
        ref = valid_vals[mid] if m % 2 else (valid_vals[mid - 1] + valid_vals[mid]) / 2.0
    else:
        ref = math.fsum(valid_vals) / m
    deltas = [abs(float(values[i]) - ref) for i in range(n) if valid[i]]
    mu = math.fsum(deltas) / m
    sigma = math.sqrt(math.fsum((x - mu) ** 2 for x in deltas) / m)
    if sigma < ZERO_TOL:
        zs = [0.0] * m
    else:
        zs = [(x - mu) / sigma for x in deltas]

    scores = [math.nan] * n
    evaluated = [False] * n
    j = 0
    for i in range(n):
        if valid[i]:
            scores[i] = zs[j]
            evaluated[i] = True
            j += 1
    if fallback == "zero":
        for i in range(n):
            if not valid[i]:
                scores[i] = 0.0
                evaluated[i] = True
    elif fallback == "median_of_valid":
        med = float(np.median(np.asarray(zs)))
        for i in range(n):
            if not valid[i]:
                scores[i] = med
                evaluated[i] = True

    emitted = [scores[i] for i in range(n) if evaluated[i]]
    e_mu = math.fsum(emitted) / len(emitted)
    e_sigma = math.sqrt(math.fsum((x - e_mu) ** 2 for x in emitted) / len(emitted))
    tau = e_mu + threshold_lambda * e_sigma
    predictions = [1 if evaluated[i] and scores[i] > tau else 0 for i in range(n)]
    return {
        "scores": scores,
        "evaluated": evaluated,
        "reference": ref,
        "mu": mu,
        "sigma": sigma,
        "tau": tau,
        "predictions": predictions,
    }


# ---------------------------------------------------------------------------
# the full scoring pipeline, brute force

def pipeline_scores(n: int, edges, features, rank: int = 8,
                    statistic: str = "variance", reference: str = "median",
                    fallback: str = "zero", threshold_lambda: float = 1.0,
                    entropy_bins: int = 10) -> dict:
    """All-pairs diversity scoring from raw features, loops throughout."""
    nbrs = adjacency_sets(n, edges)
    dirs = l2_rows(l1_rows(svd_project(features, rank)))
    values = [math.nan] * n
    valid = [False] * n
    for i in range(n):
        members = sorted(nbrs[i])
        if len(members) < 2:
            continue
        sims = []
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                dot = math.fsum(float(x) * float(y) for x, y in
                                zip(dirs[members[a]], dirs[members[b]]))
                sims.append(min(1.0, max(-1.0, dot)))
        values[i] = dispersion(sims, statistic, entropy_bins)
        valid[i] = True
    out = calibrate(values, valid, reference, fallback, threshold_lambda)
    out["diversity"] = values
    out["valid"] = valid
    return out


# ---------------------------------------------------------------------------
# heuristic baselines, dense / double-loop

def lcc_values(n: int, edges):
    nbrs = adjacency_sets(n, edges)
    edge_set = {(min(u, v), max(u, v)) for u, v in edges if u != v}
    values = [math.nan] * n
    for i in range(n):
        members = sorted(nbrs[i])
        d = len(members)
        if d < 2:
            continue
        links = 0
        for a in range(d):
            for b in range(a + 1, d):
                if (members[a], members[b]) in edge_set:
                    links += 1
        values[i] = 2.0 * links / (d * (d - 1))
    return values


def sym_norm_adjacency(n: int, edges) -> np.ndarray:
    a = dense_adjacency(n, edges)
    deg = a.sum(axis=1)
    scale = 1.0 / np.sqrt(np.maximum(deg, 1.0))
    s = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s[i, j] = scale[i] * a[i, j] * scale[j]
    return s


def nrs_values(n: int, edges, xnorm):
    s = sym_norm_adjacency(n, edges)
    smoothed = s @ np.asarray(xnorm, dtype=np.float64)
    deg = dense_adjacency(n, edges).sum(axis=1)
    values = [math.nan] * n
    for i in range(n):
        if deg[i] < 1:
            continue
        values[i] = math.sqrt(math.fsum(
            (float(xnorm[i][f]) - float(smoothed[i][f])) ** 2
            for f in range(len(xnorm[i]))))
    return values


def _safe_cos(a, b) -> float:
    na = math.sqrt(math.fsum(float(x) * float(x) for x in a))
    nb = math.sqrt(math.fsum(float(x) * float(x) for x in b))
    if na * nb <= 0.0:
        return 0.0
    dot = math.fsum(float(x) * float(y) for x, y in zip(a, b))
    return min(1.0, max(-1.0, dot / (na * nb)))


def pcd_values(n: int, edges, xnorm, weights=(1.0, 0.7, 0.5)):
    s = sym_norm_adjacency(n, edges)
    deg = dense_adjacency(n, edges).sum(axis=1)
    current = np.asarray(xnorm, dtype=np.float64)
    acc = np.zeros(n)
    for w in weights:
        nxt = s @ current
        for i in range(n):
            acc[i] += w * (1.0 - _safe_cos(current[i], nxt[i]))
        current = nxt
    return [acc[i] if deg[i] >= 1 else math.nan for i in range(n)]


def amen_values(n: int, edges, xnorm):
    """Ego-network normality, literal ordered double sums (p = q included)."""
    nbrs = adjacency_sets(n, edges)
    a = dense_adjacency(n, edges)
    deg = a.sum(axis=1)
    twom = max(1.0, float(deg.sum()))
    x = np.asarray(xnorm, dtype=np.float64)
    d = x.shape[1]

    xhat = np.zeros_like(x)
    for f in range(d):
        lo = min(x[i, f] for i in range(n))
        hi = max(x[i, f] for i in range(n))
        if hi > lo:
            for i in range(n):
                xhat[i, f] = (x[i, f] - lo) / (hi - lo)

    values = [math.nan] * n
    for i in range(n):
        if deg[i] < 2:
            continue
        ego = sorted(nbrs[i] | {i})
        x_i = np.zeros(d)
        x_e = np.zeros(d)
        for p in ego:
            for q in ego:
                w = a[p, q] - deg[p] * deg[q] / twom
                for f in range(d):
                    x_i[f] += w * xhat[p, f] * xhat[q, f]
            for b in nbrs[p]:
                if b in ego or b == i:
                    continue
                w = 1.0 - min(1.0, deg[p] * deg[b] / twom)
                for f in range(d):
                    x_e[f] -= w * xhat[p, f] * xhat[b, f]
        x_i = np.clip(x_i / max(1.0, np.abs(x_i).max()), 0.0, 1.0)
        x_e = np.clip(x_e / max(1.0, np.abs(x_e).max()), -1.0, 0.0)
        combined = x_i + x_e
        positive = [c for c in combined if c > 0]
        if positive:
            normality = math.sqrt(math.fsum(c * c for c in positive))
        else:
            normality = max(combined)
        values[i] = -normality
    return values


# ---------------------------------------------------------------------------
# evaluation metrics, brute force

def auc_exact(scores, labels) -> float:
    """Pairwise comparison count as an exact rational, then one rounding."""
    pos = [float(s) for s, y in zip(scores, labels) if y == 1]
    neg = [float(s) for s, y in zip(scores, labels) if y == 0]
    count = Fraction(0)
    for p in pos:
        for q in neg:
            if p > q:
                count += 1
            elif p == q:
                count += Fraction(1, 2)
    return float(count / (len(pos) * len(neg)))


def ranked_ids(scores) -> list[int]:
    # descending score, ascending node id on ties
    return sorted(range(len(scores)), key=lambda i: (-float(scores[i]), i))


def average_precision_exact(scores, labels) -> float:
    order = ranked_ids(scores)
    hits = 0
    terms = []
    for rank, idx in enumerate(order, start=1):
        if labels[idx] == 1:
            hits += 1
            terms.append(hits / rank)
    return math.fsum(terms) / hits


def precision_at_k_exact(scores, labels, k: int) -> float:
    order = ranked_ids(scores)
    k = min(k, len(order))
    return sum(labels[i] for i in order[:k]) / k


def ks_exact(scores, labels) -> float:
    pos = sorted(float(s) for s, y in zip(scores, labels) if y == 1)
    neg = sorted(float(s) for s, y in zip(scores, labels) if y == 0)
    best = 0.0
    for t in sorted(set(pos) | set(neg)):
        f_pos = sum(1 for s in pos if s <= t) / len(pos)
        f_neg = sum(1 for s in neg if s <= t) / len(neg)
        best = max(best, abs(f_pos - f_neg))
    return best


def pr_points_exact(scores, labels):
    order = ranked_ids(scores)
    total_pos = sum(labels[i] for i in order)
    points = []
    hits = 0
    for rank, idx in enumerate(order, start=1):
        hits += labels[idx]
        points.append((hits / total_pos, hits / rank))
    return points

"""Ranking diagnostics for scored nodes against binary ground truth.

Conventions shared by every metric here: higher score means more anomalous,
ties in ranking metrics are handled by the average-rank convention (AUC) or
broken by ascending node id (AP, precision at K), and all metrics demand
both classes present, raising :class:`UndefinedMetricError` otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import UndefinedMetricError

DEFAULT_PRECISION_KS = (100, 500, 1000, 5000)


@dataclass
class EvalReport:
    """Bundle of every diagnostic for one scored graph."""

    auc: float
    ap: float
    ks_statistic: float
    precision_at_k: dict[int, float]
    pr_points: np.ndarray
    n_evaluated: int
    n_positive: int
    method: str = ""
    config_digest: str = ""


def _checked(scores: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or labels.shape != scores.shape:
        raise UndefinedMetricError("scores and labels must be equal-length vectors")
    if scores.size == 0:
        raise UndefinedMetricError("cannot evaluate an empty score vector")
    if not np.all(np.isfinite(scores)):
        raise UndefinedMetricError("scores contain non-finite values")
    if not np.isin(labels, (0, 1)).all():
        raise UndefinedMetricError("labels must be 0 or 1")
    labels = labels.astype(np.int64)
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise UndefinedMetricError(
            "ranking metrics need both classes present, got a single class"
        )
    return scores, labels


def _descending_order(scores: np.ndarray) -> np.ndarray:
    """Indices by descending score, ties broken by ascending node id."""
    return np.lexsort((np.arange(scores.size), -scores))


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the ROC curve via the rank-sum identity.

    Equals the probability that a random positive outranks a random
    negative, with ties counting one half.
    """
    scores, labels = _checked(scores, labels)
    n = scores.size
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]

    # average ranks within tie groups (1-based ranks)
    new_group = np.r_[True, sorted_scores[1:] != sorted_scores[:-1]]
    group = np.cumsum(new_group) - 1
    counts = np.bincount(group)
    ends = np.cumsum(counts)
    average = (ends - counts + 1 + ends) / 2.0
    ranks = np.empty(n)
    ranks[order] = average[group]

    n_pos = int(labels.sum())
    n_neg = n - n_pos
    rank_sum = float(ranks[labels == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision(scores: np.ndarray, labels: np.ndarray) -> float:
    """Step-interpolated area under the precision-recall sweep."""
    scores, labels = _checked(scores, labels)
    y = labels[_descending_order(scores)]
    hits = np.cumsum(y)
    precision = hits / np.arange(1, scores.size + 1)
    recall = hits / hits[-1]
    steps = np.diff(np.concatenate([[0.0], recall]))
    return float((steps * precision).sum())


def precision_at_k(scores: np.ndarray, labels: np.ndarray, k: int) -> float:
    """Fraction of positives among the top ``min(k, n)`` scored nodes."""
    scores, labels = _checked(scores, labels)
    if k < 1:
        raise UndefinedMetricError(f"k must be >= 1, got {k}")
    k = min(k, scores.size)
    top = _descending_order(scores)[:k]
    return float(labels[top].sum() / k)


def ks_statistic(scores: np.ndarray, labels: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov separation of the score distributions."""
    scores, labels = _checked(scores, labels)
    pos = np.sort(scores[labels == 1])
    neg = np.sort(scores[labels == 0])
    thresholds = np.unique(scores)
    cdf_pos = np.searchsorted(pos, thresholds, side="right") / pos.size
    cdf_neg = np.searchsorted(neg, thresholds, side="right") / neg.size
    return float(np.abs(cdf_pos - cdf_neg).max())


def pr_curve(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-prefix ``(recall, precision)`` points down the ranked list."""
    scores, labels = _checked(scores, labels)
    y = labels[_descending_order(scores)]
    hits = np.cumsum(y)
    precision = hits / np.arange(1, scores.size + 1)
    recall = hits / hits[-1]
    return np.column_stack([recall, precision])


def evaluate(scores: np.ndarray, labels: np.ndarray,
             precision_ks: tuple[int, ...] = DEFAULT_PRECISION_KS,
             method: str = "", config_digest: str = "") -> EvalReport:
    """All diagnostics in one report."""
    checked_scores, checked_labels = _checked(scores, labels)
    return EvalReport(
        auc=auc(checked_scores, checked_labels),
        ap=average_precision(checked_scores, checked_labels),
        ks_statistic=ks_statistic(checked_scores, checked_labels),
        precision_at_k={
            k: precision_at_k(checked_scores, checked_labels, k)
            for k in precision_ks
        },
        pr_points=pr_curve(checked_scores, checked_labels),
        n_evaluated=int(checked_scores.size),
        n_positive=int(checked_labels.sum()),
        method=method,
        config_digest=config_digest,
    )

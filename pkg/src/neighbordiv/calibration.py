"""Graph-level calibration of raw per-node values into anomaly scores.

Raw diversity (or heuristic) values are compared against a single
graph-level reference, the median over valid nodes by default. A node's
deviation is the absolute distance to that reference, so both unusually
uniform and unusually diverse neighborhoods move away from zero. Deviations
are then z-scored with population statistics. Nodes without a defined raw
value receive a fallback score, and an optional threshold at
``mean + lambda * std`` of the emitted scores turns scores into 0/1 flags.

All statistics here are population statistics (divide by N, not N-1).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .exceptions import DegenerateGraphError

REFERENCES = ("median", "mean")
FALLBACKS = ("zero", "median_of_valid", "valid_only")

# below this, a spread is treated as exactly degenerate
SPREAD_TOL = 1e-15


@dataclass
class CalibrationConfig:
    reference: str = "median"
    fallback: str = "zero"
    threshold_lambda: float = 1.0

    def __post_init__(self):
        if self.reference not in REFERENCES:
            raise ValueError(f"reference must be one of {REFERENCES}")
        if self.fallback not in FALLBACKS:
            raise ValueError(f"fallback must be one of {FALLBACKS}")
        if not np.isfinite(self.threshold_lambda):
            raise ValueError("threshold_lambda must be finite")


@dataclass
class AnomalyScores:
    """Calibrated scores plus the calibration constants that produced them.

    ``scores[i]`` is NaN exactly where ``evaluated_mask[i]`` is False, which
    only happens under the ``valid_only`` fallback. ``predictions`` and
    ``tau`` stay None until a threshold is applied.
    """

    scores: np.ndarray
    evaluated_mask: np.ndarray
    valid_mask: np.ndarray
    reference_value: float
    mu_delta: float
    sigma_delta: float
    predictions: np.ndarray | None = None
    tau: float | None = None


def global_reference(values: np.ndarray, valid_mask: np.ndarray,
                     mode: str = "median") -> float:
    """Median (or mean) of the raw values over valid nodes."""
    if mode not in REFERENCES:
        raise ValueError(f"mode must be one of {REFERENCES}")
    valid = np.asarray(values, dtype=np.float64)[np.asarray(valid_mask, dtype=bool)]
    if valid.size == 0:
        raise DegenerateGraphError(
            "no node has a defined value; cannot calibrate "
            "(every node has degree below the validity minimum)"
        )
    return float(np.median(valid) if mode == "median" else valid.mean())


def deviations(values: np.ndarray, valid_mask: np.ndarray,
               reference: float) -> np.ndarray:
    """Absolute deviation from the reference, compact over valid nodes."""
    valid = np.asarray(values, dtype=np.float64)[np.asarray(valid_mask, dtype=bool)]
    return np.abs(valid - reference)


def standardize(deltas: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Population z-scores of the deviations.

    Returns ``(scores, mu, sigma)``. A spread below 1e-15 means every valid
    node deviates identically; all scores are then exactly zero.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.size == 0:
        raise DegenerateGraphError("no deviations to standardize")
    mu = float(deltas.mean())
    sigma = float(np.sqrt(np.mean((deltas - mu) ** 2)))
    if sigma < SPREAD_TOL:
        return np.zeros_like(deltas), mu, sigma
    return (deltas - mu) / sigma, mu, sigma


def apply_fallback(valid_scores: np.ndarray, valid_mask: np.ndarray,
                   policy: str = "zero", *, reference_value: float = np.nan,
                   mu_delta: float = np.nan,
                   sigma_delta: float = np.nan) -> AnomalyScores:
    """Expand compact valid-node scores to all nodes under a fallback policy.

    ``zero`` scores invalid nodes 0 (the calibrated mean deviation),
    ``median_of_valid`` gives them the median valid score, and
    ``valid_only`` leaves them NaN and outside ``evaluated_mask``.
    """
    if policy not in FALLBACKS:
        raise ValueError(f"policy must be one of {FALLBACKS}")
    valid_mask = np.asarray(valid_mask, dtype=bool)
    valid_scores = np.asarray(valid_scores, dtype=np.float64)
    if valid_scores.shape[0] != int(valid_mask.sum()):
        raise ValueError("valid_scores length must match the valid-node count")

    n = valid_mask.shape[0]
    scores = np.full(n, np.nan)
    scores[valid_mask] = valid_scores
    evaluated = valid_mask.copy()
    if policy == "zero":
        scores[~valid_mask] = 0.0
        evaluated[:] = True
    elif policy == "median_of_valid":
        scores[~valid_mask] = float(np.median(valid_scores))
        evaluated[:] = True
    return AnomalyScores(
        scores=scores,
        evaluated_mask=evaluated,
        valid_mask=valid_mask,
        reference_value=reference_value,
        mu_delta=mu_delta,
        sigma_delta=sigma_delta,
    )


def binary_threshold(result: AnomalyScores,
                     threshold_lambda: float = 1.0) -> AnomalyScores:
    """Flag nodes whose score strictly exceeds mean + lambda * std.

    The mean and population std are taken over every emitted score, fallback
    values included. Non-emitted nodes are never flagged.
    """
    emitted = result.scores[result.evaluated_mask]
    if emitted.size == 0:
        raise DegenerateGraphError("no emitted scores to threshold")
    mu = float(emitted.mean())
    sigma = float(np.sqrt(np.mean((emitted - mu) ** 2)))
    tau = mu + threshold_lambda * sigma
    predictions = np.zeros(result.scores.shape[0], dtype=np.int64)
    mask = result.evaluated_mask
    predictions[mask] = result.scores[mask] > tau
    return replace(result, predictions=predictions, tau=float(tau))


def calibrate_values(values: np.ndarray, valid_mask: np.ndarray,
                     cfg: CalibrationConfig | None = None) -> AnomalyScores:
    """Full calibration chain: reference, deviation, z-score, fallback, threshold."""
    cfg = cfg or CalibrationConfig()
    reference = global_reference(values, valid_mask, cfg.reference)
    deltas = deviations(values, valid_mask, reference)
    valid_scores, mu, sigma = standardize(deltas)
    result = apply_fallback(
        valid_scores, valid_mask, cfg.fallback,
        reference_value=reference, mu_delta=mu, sigma_delta=sigma,
    )
    return binary_threshold(result, cfg.threshold_lambda)

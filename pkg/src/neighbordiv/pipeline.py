"""End-to-end scoring: projection, per-node values, calibration.

This is the functional core behind both the estimator classes and the
command line. ``score_graph`` runs the diversity pipeline;
``score_with_method`` additionally dispatches to the heuristic baselines,
which share the calibration chain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baselines import HeuristicKind, RawHeuristicScores, raw_heuristic
from .calibration import AnomalyScores, CalibrationConfig, calibrate_values
from .diversity import DiversityConfig, DiversityScores, diversity_all
from .graph import AttributedGraph
from .projection import ProjectedFeatures, project

METHODS = ("neighbordiv", "lcc", "nrs", "pcd", "amen")


@dataclass
class PipelineResult:
    """Everything produced along the scoring chain, for reports and dumps."""

    projected: ProjectedFeatures
    diversity: DiversityScores | RawHeuristicScores
    scores: AnomalyScores


def score_projected(graph: AttributedGraph, projected: ProjectedFeatures,
                    div_cfg: DiversityConfig | None = None,
                    cal_cfg: CalibrationConfig | None = None,
                    n_workers: int | None = None) -> PipelineResult:
    """Score from an already-projected feature matrix."""
    div_cfg = div_cfg or DiversityConfig()
    diversity = diversity_all(graph, projected, div_cfg, n_workers=n_workers)
    scores = calibrate_values(diversity.values, diversity.valid_mask, cal_cfg)
    return PipelineResult(projected=projected, diversity=diversity, scores=scores)


def score_graph(graph: AttributedGraph, div_cfg: DiversityConfig | None = None,
                cal_cfg: CalibrationConfig | None = None, *, rank: int = 8,
                seed: int = 0, n_workers: int | None = None) -> PipelineResult:
    """Project the graph's features and score every node."""
    return score_projected(
        graph, project(graph, rank=rank, seed=seed), div_cfg, cal_cfg,
        n_workers=n_workers,
    )


def score_with_method(graph: AttributedGraph, method: str = "neighbordiv",
                      div_cfg: DiversityConfig | None = None,
                      cal_cfg: CalibrationConfig | None = None, *,
                      rank: int = 8, seed: int = 0,
                      n_workers: int | None = None) -> PipelineResult:
    """Score with the diversity pipeline or one of the baselines."""
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if method == "neighbordiv":
        return score_graph(graph, div_cfg, cal_cfg, rank=rank, seed=seed,
                           n_workers=n_workers)
    projected = project(graph, rank=rank, seed=seed)
    raw = raw_heuristic(graph, projected, HeuristicKind(kind=method))
    scores = calibrate_values(raw.values, raw.valid_mask, cal_cfg)
    return PipelineResult(projected=projected, diversity=raw, scores=scores)

"""Scikit-learn style detector classes over the functional pipeline.

Every detector is training-free: ``fit`` scores the graph it is given and
stores the results, so the estimator idiom mostly buys parameter handling
(``get_params`` / ``set_params``, clone-ability) and a uniform
``fit`` / ``decision_function`` / ``predict`` surface. Passing a graph to
``decision_function`` or ``predict`` scores that graph statelessly.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .calibration import CalibrationConfig
from .diversity import DiversityConfig
from .exceptions import NeighborDivError
from .graph import AttributedGraph
from .pipeline import PipelineResult, score_graph, score_with_method


class _BaseDetector(BaseEstimator):
    """Shared fit plumbing; subclasses define ``_score``."""

    def _score(self, graph: AttributedGraph) -> PipelineResult:
        raise NotImplementedError

    def fit(self, graph: AttributedGraph, y=None):
        """Score ``graph`` and keep the results on the estimator."""
        result = self._score(graph)
        self.result_ = result
        self.scores_ = result.scores.scores
        self.predictions_ = result.scores.predictions
        self.valid_mask_ = result.scores.valid_mask
        self.evaluated_mask_ = result.scores.evaluated_mask
        self.threshold_ = result.scores.tau
        return self

    def _fitted(self) -> None:
        if not hasattr(self, "result_"):
            raise NeighborDivError(
                f"{type(self).__name__} has no scores yet; call fit first"
            )

    def decision_function(self, graph: AttributedGraph | None = None) -> np.ndarray:
        """Anomaly scores, higher meaning more anomalous."""
        if graph is not None:
            return self._score(graph).scores.scores
        self._fitted()
        return self.scores_

    def predict(self, graph: AttributedGraph | None = None) -> np.ndarray:
        """0/1 flags from the calibrated threshold."""
        if graph is not None:
            return self._score(graph).scores.predictions
        self._fitted()
        return self.predictions_

    def fit_predict(self, graph: AttributedGraph, y=None) -> np.ndarray:
        return self.fit(graph).predictions_

    def _calibration_config(self) -> CalibrationConfig:
        return CalibrationConfig(
            reference=self.reference,
            fallback=self.fallback,
            threshold_lambda=self.threshold_scale,
        )


class NeighborDiversityDetector(_BaseDetector):
    """Flags nodes whose neighbors look unusually alike or unusually mixed.

    Neighbor features are projected to ``rank`` dimensions, each node
    receives a dispersion statistic of pairwise neighbor cosine
    similarities, and deviations from the graph-wide median are z-scored.
    ``sampling_budget`` switches the per-node pair enumeration to Monte
    Carlo sampling of that many pairs.

    Parameters
    ----------
    rank : int
        Projection dimensionality (actual rank capped by the data shape).
    statistic : {"variance", "std_dev", "mean", "entropy"}
    reference : {"median", "mean"}
        Graph-level reference the deviations are measured from.
    fallback : {"zero", "median_of_valid", "valid_only"}
        Score policy for nodes of degree below two.
    sampling_budget : int or None
        Pairs per node for Monte Carlo mode; None evaluates all pairs.
    entropy_bins : int
        Histogram bins when ``statistic="entropy"``.
    threshold_scale : float
        Lambda in the ``mean + lambda * std`` flagging threshold.
    seed : int
        Drives the projection sketch and the per-node sampling streams.
    n_workers : int or None
        Worker threads; None defers to the NDIV_THREADS environment value.
    """

    def __init__(self, rank: int = 8, statistic: str = "variance",
                 reference: str = "median", fallback: str = "zero",
                 sampling_budget: int | None = None, entropy_bins: int = 10,
                 threshold_scale: float = 1.0, seed: int = 0,
                 n_workers: int | None = None):
        self.rank = rank
        self.statistic = statistic
        self.reference = reference
        self.fallback = fallback
        self.sampling_budget = sampling_budget
        self.entropy_bins = entropy_bins
        self.threshold_scale = threshold_scale
        self.seed = seed
        self.n_workers = n_workers

    def _score(self, graph: AttributedGraph) -> PipelineResult:
        div_cfg = DiversityConfig(
            statistic=self.statistic,
            sampling_budget=self.sampling_budget,
            entropy_bins=self.entropy_bins,
            master_seed=self.seed,
        )
        return score_graph(graph, div_cfg, self._calibration_config(),
                           rank=self.rank, seed=self.seed,
                           n_workers=self.n_workers)

    def fit(self, graph: AttributedGraph, y=None):
        fitted = super().fit(graph)
        self.diversity_values_ = self.result_.diversity.values
        return fitted


class _HeuristicDetector(_BaseDetector):
    """Calibrated heuristic baseline; subclasses pin the method name."""

    method = ""

    def __init__(self, rank: int = 8, reference: str = "median",
                 fallback: str = "zero", threshold_scale: float = 1.0,
                 seed: int = 0):
        self.rank = rank
        self.reference = reference
        self.fallback = fallback
        self.threshold_scale = threshold_scale
        self.seed = seed

    def _score(self, graph: AttributedGraph) -> PipelineResult:
        return score_with_method(
            graph, self.method, None, self._calibration_config(),
            rank=self.rank, seed=self.seed,
        )


class LocalClusteringDetector(_HeuristicDetector):
    """Structure-only baseline: calibrated local clustering coefficient."""

    method = "lcc"


class NeighborResidualDetector(_HeuristicDetector):
    """Feature-smoothness baseline: residual to the neighbor aggregate."""

    method = "nrs"


class PropagationDecayDetector(_HeuristicDetector):
    """Multi-hop baseline: cosine drift under repeated propagation."""

    method = "pcd"


class EgoNormalityDetector(_HeuristicDetector):
    """Ego-network baseline: negated attribute-aware community normality."""

    method = "amen"


DETECTORS = {
    "neighbordiv": NeighborDiversityDetector,
    "lcc": LocalClusteringDetector,
    "nrs": NeighborResidualDetector,
    "pcd": PropagationDecayDetector,
    "amen": EgoNormalityDetector,
}

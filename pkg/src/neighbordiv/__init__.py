"""Training-free node anomaly detection from neighborhood feature diversity.

A node is scored by how much the dispersion of pairwise cosine similarities
among its neighbors' projected features deviates from the graph-wide
typical dispersion. No labels, no training; one pass over the graph.

Quick start::

    from neighbordiv import NeighborDiversityDetector, build_graph

    graph = build_graph(edges, features)
    detector = NeighborDiversityDetector().fit(graph)
    scores = detector.scores_
"""

from .baselines import (HeuristicKind, RawHeuristicScores, calibrate_heuristic,
                        ego_normality, local_clustering, neighbor_residual,
                        propagation_decay, raw_heuristic)
from .calibration import (AnomalyScores, CalibrationConfig, apply_fallback,
                          binary_threshold, calibrate_values, deviations,
                          global_reference, standardize)
from .diversity import (DiversityConfig, DiversityScores, dispersion_statistic,
                        diversity_all, neighbor_diversity, pair_count,
                        pair_from_index, pair_index, pairwise_similarity,
                        sample_pairs)
from .estimators import (DETECTORS, EgoNormalityDetector,
                         LocalClusteringDetector, NeighborDiversityDetector,
                         NeighborResidualDetector, PropagationDecayDetector)
from .exceptions import (DegenerateGraphError, GraphInputError,
                         InfeasibleSpecError, NeighborDivError,
                         UndefinedMetricError)
from .graph import (AttributedGraph, EdgeList, NodeDegreeProfile, build_graph,
                    degree_profile, load_edge_list, load_features, load_labels,
                    write_edge_list, write_features, write_labels)
from .metrics import (EvalReport, auc, average_precision, evaluate,
                      ks_statistic, pr_curve, precision_at_k)
from .pipeline import (METHODS, PipelineResult, score_graph, score_projected,
                       score_with_method)
from .projection import (ProjectedFeatures, build_projected,
                         l1_normalize_rows, project, truncated_svd,
                         unit_directions)
from .synthetic import (SyntheticGraph, SyntheticSpec, generate, generate_sbm,
                        homophily_ratio, inject_anomalies, sbm_probabilities)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

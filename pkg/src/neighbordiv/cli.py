"""Command line front end.

Subcommands
-----------
score
    Score nodes of a graph given an edge list and a feature matrix.
evaluate
    Score and compare against binary labels, emitting ranking diagnostics.
generate
    Sample a synthetic benchmark graph with planted anomalies.
sweep
    Generate-and-evaluate over a grid of homophily levels, seeds, and
    methods.
bench
    Time the full pair enumeration against Monte Carlo budgets.

Every command writes into ``--out-dir``. Scores go to ``scores.csv`` with 17
significant digits; reports go to ``report.json`` with 6 significant digits
and a fixed key order, so reruns with the same seed are byte-identical.
Exit codes: 0 success, 1 degenerate input or undefined request, 2 usage or
file-format errors. ``NDIV_THREADS`` sets worker threads without changing
any output.

Example::

    neighbordiv generate --out-dir bench --homophily 0.5 --seed 7
    neighbordiv evaluate --edges bench/edges.txt --features bench/features.csv \\
        --labels bench/labels.txt --out-dir run --pairs 100
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from ._parallel import run_chunked, worker_count
from .baselines import HeuristicKind, raw_heuristic
from .calibration import CalibrationConfig, calibrate_values
from .diversity import DiversityConfig
from .exceptions import GraphInputError, NeighborDivError
from .graph import (AttributedGraph, build_graph, degree_profile,
                    load_edge_list, load_features, load_labels,
                    write_edge_list, write_features, write_labels)
from .metrics import evaluate as evaluate_scores
from .pipeline import METHODS, score_projected
from .projection import ProjectedFeatures, project
from .synthetic import (ANOMALY_TYPES, SyntheticSpec, generate,
                        sbm_probabilities)

log = logging.getLogger("neighbordiv")

_SCORING_DEFAULTS = {
    "method": "neighbordiv",
    "rank": 8,
    "statistic": "variance",
    "reference": "median",
    "fallback": "zero",
    "pairs": "full",
    "threshold_lambda": 1.0,
    "threshold": True,
    "seed": 0,
}

DEFAULT_H_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass
class RunConfig:
    """Resolved scoring options shared by score / evaluate / sweep / bench."""

    method: str = "neighbordiv"
    rank: int = 8
    statistic: str = "variance"
    reference: str = "median"
    fallback: str = "zero"
    pairs: str | int = "full"
    threshold_lambda: float = 1.0
    threshold: bool = True
    seed: int = 0

    @property
    def sampling_budget(self) -> int | None:
        return None if self.pairs == "full" else int(self.pairs)

    def diversity_config(self) -> DiversityConfig:
        return DiversityConfig(
            statistic=self.statistic,
            sampling_budget=self.sampling_budget,
            master_seed=self.seed,
        )

    def calibration_config(self) -> CalibrationConfig:
        return CalibrationConfig(
            reference=self.reference,
            fallback=self.fallback,
            threshold_lambda=self.threshold_lambda,
        )

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


def _parse_pairs(value) -> str | int:
    if value in (None, "full"):
        return "full"
    try:
        budget = int(value)
    except (TypeError, ValueError):
        raise GraphInputError(
            f"--pairs must be 'full' or a positive integer, got {value!r}"
        ) from None
    if budget < 1:
        raise GraphInputError(f"--pairs must be >= 1, got {budget}")
    return budget


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, an optional JSON config file, and CLI flags.

    CLI flags win over the file, the file wins over defaults. Unknown keys
    in the file are rejected rather than ignored.
    """
    merged = dict(_SCORING_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                loaded = json.load(fh)
            except json.JSONDecodeError as exc:
                raise GraphInputError(f"{config_path}: invalid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise GraphInputError(f"{config_path}: config must be a JSON object")
        unknown = set(loaded) - set(merged)
        if unknown:
            raise GraphInputError(
                f"{config_path}: unknown config keys: {sorted(unknown)}"
            )
        merged.update(loaded)

    for key in ("method", "rank", "statistic", "reference", "fallback",
                "threshold_lambda", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "pairs", None) is not None:
        merged["pairs"] = args.pairs
    if getattr(args, "no_threshold", False):
        merged["threshold"] = False

    merged["pairs"] = _parse_pairs(merged["pairs"])
    cfg = RunConfig(**merged)
    if cfg.method not in METHODS:
        raise GraphInputError(f"method must be one of {METHODS}, got {cfg.method!r}")
    if cfg.rank < 1:
        raise GraphInputError(f"--rank must be >= 1, got {cfg.rank}")
    if cfg.seed < 0:
        raise GraphInputError(f"--seed must be non-negative, got {cfg.seed}")
    try:
        cfg.diversity_config()
        cfg.calibration_config()
    except ValueError as exc:
        raise GraphInputError(str(exc)) from None
    return cfg


def _load_graph(args: argparse.Namespace, need_labels: bool) -> AttributedGraph:
    if not getattr(args, "edges", None) or not getattr(args, "features", None):
        raise GraphInputError("--edges and --features are required")
    edge_list = load_edge_list(args.edges)
    features = load_features(args.features)
    # ids in the edge file index feature rows directly, so undo the
    # loader's dense remapping before wiring the two together
    edges = edge_list.node_ids[edge_list.edges]
    if edges.max() >= features.shape[0]:
        raise GraphInputError(
            f"edge list references node {int(edges.max())} but the "
            f"feature matrix has only {features.shape[0]} rows"
        )
    labels = None
    if getattr(args, "labels", None):
        labels = load_labels(args.labels, features.shape[0])
    elif need_labels:
        raise GraphInputError("--labels is required for this command")
    return build_graph(edges, features, labels=labels)


def _score_one(graph: AttributedGraph, projected: ProjectedFeatures,
               cfg: RunConfig, n_workers: int | None = None):
    """Score with the configured method, reusing a shared projection."""
    if cfg.method == "neighbordiv":
        result = score_projected(graph, projected, cfg.diversity_config(),
                                 cfg.calibration_config(), n_workers=n_workers)
        return result.diversity, result.scores
    raw = raw_heuristic(graph, projected, HeuristicKind(kind=cfg.method))
    return raw, calibrate_values(raw.values, raw.valid_mask,
                                 cfg.calibration_config())


def _sig6(value):
    """Round floats to 6 significant digits, recursively, for stable JSON."""
    if isinstance(value, float):
        return float(f"{value:.6g}")
    if isinstance(value, dict):
        return {k: _sig6(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sig6(v) for v in value]
    return value


def _write_json(payload: dict, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_sig6(payload), fh, indent=2)
        fh.write("\n")


def _write_scores_csv(path: Path, scores, with_threshold: bool) -> None:
    header = "node,score,prediction" if with_threshold else "node,score"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for node in np.flatnonzero(scores.evaluated_mask):
            row = f"{node},{scores.scores[node]:.17g}"
            if with_threshold:
                row += f",{int(scores.predictions[node])}"
            fh.write(row + "\n")


def _graph_summary(graph: AttributedGraph) -> dict:
    profile = degree_profile(graph)
    return {
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "valid_nodes": int(profile.valid_mask.sum()),
        "isolated_nodes": profile.isolated_count,
        "degree_one_nodes": profile.degree_one_count,
    }


def _config_block(cfg: RunConfig) -> dict:
    block = asdict(cfg)
    block["pairs"] = cfg.pairs if cfg.pairs == "full" else int(cfg.pairs)
    return block


def _calibration_block(scores, with_threshold: bool) -> dict:
    block = {
        "reference_value": scores.reference_value,
        "mu_delta": scores.mu_delta,
        "sigma_delta": scores.sigma_delta,
    }
    if with_threshold:
        block["tau"] = scores.tau
        block["flagged"] = int(scores.predictions[scores.evaluated_mask].sum())
    return block


def cmd_score(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    graph = _load_graph(args, need_labels=args.command == "evaluate")
    projected = project(graph, rank=cfg.rank, seed=cfg.seed)
    per_node, scores = _score_one(graph, projected, cfg)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_scores_csv(out_dir / "scores.csv", scores, cfg.threshold)
    if getattr(args, "dump_projection", False):
        _dump_matrix(out_dir / "projection.csv", projected.projected)
    if getattr(args, "dump_diversity", False):
        _dump_diversity(out_dir / "diversity.csv", per_node)

    report = {
        "command": args.command,
        "method": cfg.method,
        "config": _config_block(cfg),
        "config_digest": cfg.digest(),
        "graph": _graph_summary(graph),
        "projection": {"rank_used": projected.rank_used},
        "calibration": _calibration_block(scores, cfg.threshold),
    }
    if args.command == "evaluate":
        mask = scores.evaluated_mask
        report["metrics"] = _metrics_block(
            scores.scores[mask], graph.labels[mask], cfg)
        if getattr(args, "pr_csv", False):
            _write_pr_csv(out_dir / "pr_curve.csv",
                          scores.scores[mask], graph.labels[mask])
    _write_json(report, out_dir / "report.json")
    log.info("scored %d nodes with %s", graph.node_count, cfg.method)
    return 0


def _metrics_block(scores: np.ndarray, labels: np.ndarray,
                   cfg: RunConfig) -> dict:
    report = evaluate_scores(scores, labels, method=cfg.method,
                             config_digest=cfg.digest())
    return {
        "auc": report.auc,
        "ap": report.ap,
        "ks": report.ks_statistic,
        "precision_at_k": {str(k): v for k, v in report.precision_at_k.items()},
        "n_evaluated": report.n_evaluated,
        "n_positive": report.n_positive,
    }


def _write_pr_csv(path: Path, scores: np.ndarray, labels: np.ndarray) -> None:
    from .metrics import pr_curve
    points = pr_curve(scores, labels)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("recall,precision\n")
        for recall, precision in points:
            fh.write(f"{recall:.17g},{precision:.17g}\n")


def _dump_matrix(path: Path, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        width = matrix.shape[1]
        fh.write("node," + ",".join(f"c{i}" for i in range(width)) + "\n")
        for node, row in enumerate(matrix):
            fh.write(str(node) + "," +
                     ",".join(f"{v:.17g}" for v in row) + "\n")


def _dump_diversity(path: Path, per_node) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        pairs = getattr(per_node, "pairs_evaluated", None)
        fh.write("node,value" + (",pairs" if pairs is not None else "") + "\n")
        for node in np.flatnonzero(per_node.valid_mask):
            row = f"{node},{per_node.values[node]:.17g}"
            if pairs is not None:
                row += f",{int(pairs[node])}"
            fh.write(row + "\n")


def _spec_from_args(args: argparse.Namespace, homophily: float,
                    seed: int, anomaly_type: str) -> SyntheticSpec:
    return SyntheticSpec(
        target_homophily=homophily,
        n=args.n,
        communities=args.communities,
        avg_degree=args.avg_degree,
        feature_dim=args.feature_dim,
        center_variance=args.center_variance,
        noise_variance=args.noise_variance,
        anomaly_type=anomaly_type,
        anomalies_per_type=args.anomalies_per_type,
        seed=seed,
    )


def cmd_generate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, args.homophily, args.seed, args.anomaly_type)
    synthetic = generate(spec)
    graph = synthetic.graph

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out_dir / "edges.txt")
    write_features(graph.features, out_dir / "features.csv")
    write_labels(graph.labels, out_dir / "labels.txt")
    write_labels(graph.communities, out_dir / "communities.txt")

    p_in, p_out = sbm_probabilities(spec)
    meta = {
        "spec": asdict(spec),
        "p_in": p_in,
        "p_out": p_out,
        "measured_homophily": synthetic.measured_homophily,
        "nodes": graph.node_count,
        "edges": graph.edge_count,
        "anomalies": [
            {"node": node, "kind": kind} for node, kind in synthetic.anomalies
        ],
    }
    _write_json(meta, out_dir / "meta.json")
    log.info("generated %d nodes / %d edges at homophily %.3f",
             graph.node_count, graph.edge_count, synthetic.measured_homophily)
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in METHODS:
            raise GraphInputError(f"unknown method {method!r} in --methods")
    anomaly_types = [a.strip() for a in args.anomaly_types.split(",") if a.strip()]
    for atype in anomaly_types:
        if atype not in ANOMALY_TYPES:
            raise GraphInputError(f"unknown anomaly type {atype!r}")
    h_values = [float(tok) for tok in args.h_values.split(",") if tok.strip()]
    seeds = list(range(cfg.seed, cfg.seed + args.seeds))

    cells = [(atype, h, seed) for atype in anomaly_types
             for h in h_values for seed in seeds]
    rows: dict[tuple, list] = {}

    def work(chunk):
        for atype, h, seed in chunk:
            spec = _spec_from_args(args, h, seed, atype)
            synthetic = generate(spec)
            graph = synthetic.graph
            projected = project(graph, rank=cfg.rank, seed=cfg.seed)
            for method in methods:
                cell_cfg = RunConfig(**{**asdict(cfg), "method": method})
                _, scores = _score_one(graph, projected, cell_cfg, n_workers=1)
                mask = scores.evaluated_mask
                report = evaluate_scores(scores.scores[mask],
                                         graph.labels[mask])
                rows[(atype, h, seed, method)] = [report.auc, report.ap]

    workers = worker_count()
    run_chunked(work, _chunk_cells(cells, workers), workers)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write("anomaly_type,h,seed,method,auc,ap\n")
        for key in sorted(rows):
            atype, h, seed, method = key
            auc_value, ap_value = rows[key]
            fh.write(f"{atype},{h:.17g},{seed},{method},"
                     f"{auc_value:.17g},{ap_value:.17g}\n")
    with open(out_dir / "sweep_mean.csv", "w", encoding="utf-8") as fh:
        fh.write("anomaly_type,method,h,mean_auc,mean_ap,seeds\n")
        for atype in sorted(anomaly_types):
            for method in sorted(methods):
                for h in sorted(h_values):
                    aucs = [rows[(atype, h, seed, method)][0] for seed in seeds]
                    aps = [rows[(atype, h, seed, method)][1] for seed in seeds]
                    fh.write(f"{atype},{method},{h:.17g},"
                             f"{np.mean(aucs):.17g},{np.mean(aps):.17g},"
                             f"{len(seeds)}\n")
    log.info("swept %d cells x %d methods", len(cells), len(methods))
    return 0


def _chunk_cells(cells: list, workers: int) -> list[list]:
    if workers <= 1:
        return [cells]
    size = max(1, (len(cells) + workers - 1) // workers)
    return [cells[i:i + size] for i in range(0, len(cells), size)]


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    graph = _load_graph(args, need_labels=False)
    budgets = [int(tok) for tok in args.budgets.split(",") if tok.strip()]
    for budget in budgets:
        if budget < 1:
            raise GraphInputError(f"budgets must be >= 1, got {budget}")

    projected = project(graph, rank=cfg.rank, seed=cfg.seed)
    records = []
    for label_mode, budget in [("full", None)] + [("sampled", b) for b in budgets]:
        run = RunConfig(**{**asdict(cfg),
                           "pairs": "full" if budget is None else budget})
        started = time.perf_counter()
        _, scores = _score_one(graph, projected, run)
        elapsed = time.perf_counter() - started
        auc_text = ""
        if graph.labels is not None:
            mask = scores.evaluated_mask
            auc_text = f"{evaluate_scores(scores.scores[mask], graph.labels[mask]).auc:.17g}"
        records.append((label_mode, budget, elapsed, auc_text))
        log.info("bench %s pairs=%s: %.3fs", label_mode, budget, elapsed)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # Wall times go to a sidecar so bench.csv stays reproducible run-to-run.
    with open(out_dir / "bench.csv", "w", encoding="utf-8") as fh:
        fh.write("mode,pairs,auc\n")
        for label_mode, budget, _, auc_text in records:
            pairs_text = "" if budget is None else str(budget)
            fh.write(f"{label_mode},{pairs_text},{auc_text}\n")
    with open(out_dir / "timings.txt", "w", encoding="utf-8") as fh:
        for label_mode, budget, elapsed, _ in records:
            pairs_text = "full" if budget is None else str(budget)
            fh.write(f"{label_mode} pairs={pairs_text} {elapsed:.6f}s\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neighbordiv",
        description="Training-free node anomaly detection from neighborhood "
                    "feature diversity.",
    )
    parser.add_argument("--verbose", action="store_true",
                        help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scoring_flags(p, with_inputs=True):
        if with_inputs:
            p.add_argument("--edges", help="edge list file (u v per line)")
            p.add_argument("--features", help="feature matrix CSV/TSV")
            p.add_argument("--labels", help="binary label file (0/1 per line)")
        p.add_argument("--method", choices=METHODS, default=None,
                       help="scorer to run (default neighbordiv)")
        p.add_argument("--rank", type=int, default=None,
                       help="projection rank (default 8)")
        p.add_argument("--statistic", default=None,
                       choices=("variance", "std_dev", "mean", "entropy"))
        p.add_argument("--reference", default=None, choices=("median", "mean"))
        p.add_argument("--fallback", default=None,
                       choices=("zero", "median_of_valid", "valid_only"))
        p.add_argument("--pairs", default=None, metavar="FULL_OR_K",
                       help="'full' or a per-node pair sampling budget")
        p.add_argument("--lambda", dest="threshold_lambda", type=float,
                       default=None, help="threshold scale (default 1.0)")
        p.add_argument("--no-threshold", action="store_true",
                       help="omit binary predictions")
        p.add_argument("--seed", type=int, default=None,
                       help="seed for projection and sampling (default 0)")
        p.add_argument("--config", help="JSON file with the same option keys")
        p.add_argument("--out-dir", required=True, help="output directory")

    p_score = sub.add_parser("score", help="score nodes of an input graph")
    add_scoring_flags(p_score)
    p_score.add_argument("--dump-projection", action="store_true",
                         help="also write projection.csv")
    p_score.add_argument("--dump-diversity", action="store_true",
                         help="also write per-node diversity.csv")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("evaluate",
                            help="score and compare against labels")
    add_scoring_flags(p_eval)
    p_eval.add_argument("--dump-projection", action="store_true")
    p_eval.add_argument("--dump-diversity", action="store_true")
    p_eval.add_argument("--pr-csv", action="store_true",
                        help="also write pr_curve.csv")
    p_eval.set_defaults(func=cmd_score)

    def add_generation_flags(p):
        p.add_argument("--n", type=int, default=2000)
        p.add_argument("--communities", type=int, default=5)
        p.add_argument("--avg-degree", type=float, default=15.0)
        p.add_argument("--feature-dim", type=int, default=50)
        p.add_argument("--center-variance", type=float, default=9.0)
        p.add_argument("--noise-variance", type=float, default=1.0)
        p.add_argument("--anomalies-per-type", type=int, default=50)

    p_gen = sub.add_parser("generate", help="sample a synthetic benchmark")
    add_generation_flags(p_gen)
    p_gen.add_argument("--homophily", type=float, required=True)
    p_gen.add_argument("--anomaly-type", choices=ANOMALY_TYPES, default="mixed")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out-dir", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_sweep = sub.add_parser("sweep", help="grid of homophily x seed x method")
    add_generation_flags(p_sweep)
    add_scoring_flags(p_sweep, with_inputs=False)
    p_sweep.add_argument("--methods", default="neighbordiv",
                         help="comma-separated methods")
    p_sweep.add_argument("--anomaly-types", default=",".join(ANOMALY_TYPES),
                         help="comma-separated anomaly types")
    p_sweep.add_argument("--h-values",
                         default=",".join(str(h) for h in DEFAULT_H_GRID),
                         help="comma-separated homophily levels")
    p_sweep.add_argument("--seeds", type=int, default=3,
                         help="number of seeds starting at --seed")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="time full vs sampled enumeration")
    add_scoring_flags(p_bench)
    p_bench.add_argument("--budgets", default="100",
                         help="comma-separated pair budgets")
    p_bench.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (GraphInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NeighborDivError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()

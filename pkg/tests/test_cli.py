"""End-to-end command behavior: exit codes, outputs, precedence, determinism."""

import json
import math

import numpy as np
import pytest

from neighbordiv.cli import main

GEN_SMALL = ["--n", "200", "--communities", "4", "--avg-degree", "8",
             "--feature-dim", "10", "--anomalies-per-type", "5"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    """One small generated benchmark shared by the scoring tests."""
    out = tmp_path_factory.mktemp("data")
    code = main(["generate", "--homophily", "0.5", "--seed", "1",
                 *GEN_SMALL, "--out-dir", str(out)])
    assert code == 0
    return out


def graph_args(dataset, with_labels=True):
    args = ["--edges", str(dataset / "edges.txt"),
            "--features", str(dataset / "features.csv")]
    if with_labels:
        args += ["--labels", str(dataset / "labels.txt")]
    return args


def test_generate_outputs(dataset):
    for name in ("edges.txt", "features.csv", "labels.txt",
                 "communities.txt", "meta.json"):
        assert (dataset / name).exists(), name
    meta = json.loads((dataset / "meta.json").read_text())
    assert meta["nodes"] == 200
    assert meta["spec"]["target_homophily"] == 0.5
    assert len(meta["anomalies"]) == 10
    assert 0 < meta["p_out"] < meta["p_in"] < 1
    assert abs(meta["measured_homophily"] - 0.5) < 0.1
    labels = (dataset / "labels.txt").read_text().splitlines()
    assert len(labels) == 200
    assert sum(int(x) for x in labels) == 10


def test_score_writes_csv_and_report(dataset, tmp_path):
    out = tmp_path / "scored"
    assert main(["score", *graph_args(dataset, with_labels=False),
                 "--out-dir", str(out)]) == 0
    lines = (out / "scores.csv").read_text().splitlines()
    assert lines[0] == "node,score,prediction"
    assert len(lines) == 201           # zero fallback emits every node
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "score"
    assert report["method"] == "neighbordiv"
    assert report["graph"]["nodes"] == 200
    assert report["projection"]["rank_used"] == 8
    assert "tau" in report["calibration"]
    assert "metrics" not in report


def test_no_threshold_drops_prediction_column(dataset, tmp_path):
    out = tmp_path / "nothresh"
    assert main(["score", *graph_args(dataset, False), "--no-threshold",
                 "--out-dir", str(out)]) == 0
    lines = (out / "scores.csv").read_text().splitlines()
    assert lines[0] == "node,score"
    report = json.loads((out / "report.json").read_text())
    assert "tau" not in report["calibration"]


def test_evaluate_adds_metrics_and_pr(dataset, tmp_path):
    out = tmp_path / "eval"
    assert main(["evaluate", *graph_args(dataset), "--pr-csv",
                 "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    metrics = report["metrics"]
    assert 0.0 <= metrics["auc"] <= 1.0
    assert metrics["n_evaluated"] == 200
    assert metrics["n_positive"] == 10
    assert set(metrics["precision_at_k"]) == {"100", "500", "1000", "5000"}
    pr = (out / "pr_curve.csv").read_text().splitlines()
    assert pr[0] == "recall,precision"
    assert len(pr) == 201


def test_report_floats_are_six_significant_digits(dataset, tmp_path):
    out = tmp_path / "digits"
    assert main(["evaluate", *graph_args(dataset), "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())

    def walk(value):
        if isinstance(value, float):
            assert value == float(f"{value:.6g}")
        elif isinstance(value, dict):
            for v in value.values():
                walk(v)
        elif isinstance(value, list):
            for v in value:
                walk(v)

    walk(report)


def test_dump_flags_write_sidecars(dataset, tmp_path):
    out = tmp_path / "dumps"
    assert main(["score", *graph_args(dataset, False), "--dump-projection",
                 "--dump-diversity", "--out-dir", str(out)]) == 0
    proj = (out / "projection.csv").read_text().splitlines()
    assert proj[0].startswith("node,c0,")
    assert len(proj) == 201
    div = (out / "diversity.csv").read_text().splitlines()
    assert div[0] == "node,value,pairs"


def test_heuristic_method_flag(dataset, tmp_path):
    out = tmp_path / "lcc"
    assert main(["evaluate", *graph_args(dataset), "--method", "lcc",
                 "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["method"] == "lcc"


def test_config_file_and_flag_precedence(dataset, tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"rank": 4, "method": "nrs"}))
    out = tmp_path / "merged"
    assert main(["score", *graph_args(dataset, False), "--config",
                 str(cfg_path), "--rank", "6", "--out-dir", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["rank"] == 6       # flag beats file
    assert report["config"]["method"] == "nrs"  # file beats default


def test_unknown_config_key_rejected(dataset, tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"ranks": 4}))
    code = main(["score", *graph_args(dataset, False), "--config",
                 str(cfg_path), "--out-dir", str(tmp_path / "x")])
    assert code == 2
    assert "unknown config keys" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


@pytest.mark.parametrize("extra", [
    ["--rank", "0"],
    ["--pairs", "0"],
    ["--pairs", "some"],
    ["--seed", "-3"],
])
def test_bad_scoring_flags_exit_two(dataset, tmp_path, extra):
    code = main(["score", *graph_args(dataset, False), *extra,
                 "--out-dir", str(tmp_path / "bad")])
    assert code == 2
    assert not (tmp_path / "bad").exists()


def test_missing_inputs_exit_two(tmp_path, capsys):
    code = main(["score", "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "required" in capsys.readouterr().err
    code = main(["score", "--edges", str(tmp_path / "none.txt"),
                 "--features", str(tmp_path / "none.csv"),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 2


def test_evaluate_requires_labels(dataset, tmp_path, capsys):
    code = main(["evaluate", *graph_args(dataset, with_labels=False),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "labels" in capsys.readouterr().err


def test_malformed_edge_file_exits_two(tmp_path, capsys):
    edges = tmp_path / "edges.txt"
    edges.write_text("0 1\nnot numbers\n")
    features = tmp_path / "features.csv"
    features.write_text("1.0\n2.0\n")
    code = main(["score", "--edges", str(edges), "--features", str(features),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 2
    assert "edges.txt:2" in capsys.readouterr().err


def test_degenerate_graph_exits_one(tmp_path, capsys):
    # a single edge leaves no node with two neighbors, so there is nothing
    # to calibrate against
    edges = tmp_path / "edges.txt"
    edges.write_text("0 1\n")
    features = tmp_path / "features.csv"
    features.write_text("1.0,2.0\n3.0,4.0\n")
    code = main(["score", "--edges", str(edges), "--features", str(features),
                 "--out-dir", str(tmp_path / "o")])
    assert code == 1
    assert "degree" in capsys.readouterr().err


def test_mismatched_feature_rows_exit_two(tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("0 3\n")
    features = tmp_path / "features.csv"
    features.write_text("1.0\n2.0\n")
    assert main(["score", "--edges", str(edges), "--features", str(features),
                 "--out-dir", str(tmp_path / "o")]) == 2


def test_pairs_budget_covering_full_is_identical(dataset, tmp_path):
    full = tmp_path / "full"
    capped = tmp_path / "capped"
    assert main(["score", *graph_args(dataset, False),
                 "--out-dir", str(full)]) == 0
    assert main(["score", *graph_args(dataset, False), "--pairs", "999999",
                 "--out-dir", str(capped)]) == 0
    assert (full / "scores.csv").read_bytes() == (capped / "scores.csv").read_bytes()


def test_valid_only_fallback_drops_rows(dataset, tmp_path):
    out = tmp_path / "validonly"
    assert main(["score", *graph_args(dataset, False), "--fallback",
                 "valid_only", "--out-dir", str(out)]) == 0
    lines = (out / "scores.csv").read_text().splitlines()
    meta = json.loads((dataset / "meta.json").read_text())
    assert len(lines) - 1 <= meta["nodes"]
    for line in lines[1:]:
        assert not math.isnan(float(line.split(",")[1]))


def test_sweep_writes_grid(tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", *GEN_SMALL, "--methods", "neighbordiv,lcc",
                 "--anomaly-types", "mixed", "--h-values", "0.5",
                 "--seeds", "2", "--out-dir", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert rows[0] == "anomaly_type,h,seed,method,auc,ap"
    assert len(rows) == 1 + 2 * 2      # 2 seeds x 2 methods
    means = (out / "sweep_mean.csv").read_text().splitlines()
    assert means[0] == "anomaly_type,method,h,mean_auc,mean_ap,seeds"
    assert len(means) == 1 + 2
    for line in means[1:]:
        assert line.endswith(",2")


def test_bench_outputs_are_timing_free(dataset, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert main(["bench", *graph_args(dataset), "--budgets", "5,20",
                     "--out-dir", str(out)]) == 0
    rows = (a / "bench.csv").read_text().splitlines()
    assert rows[0] == "mode,pairs,auc"
    assert [r.split(",")[0] for r in rows[1:]] == ["full", "sampled", "sampled"]
    # wall times live in the sidecar, so the csv is bit-stable
    assert (a / "bench.csv").read_bytes() == (b / "bench.csv").read_bytes()
    assert (a / "timings.txt").exists()


def test_outputs_identical_across_thread_counts(dataset, tmp_path, monkeypatch):
    outputs = {}
    for threads in ("1", "8"):
        monkeypatch.setenv("NDIV_THREADS", threads)
        out = tmp_path / f"t{threads}"
        assert main(["evaluate", *graph_args(dataset), "--pairs", "12",
                     "--out-dir", str(out)]) == 0
        outputs[threads] = {
            name: (out / name).read_bytes()
            for name in ("scores.csv", "report.json")
        }
    assert outputs["1"] == outputs["8"]

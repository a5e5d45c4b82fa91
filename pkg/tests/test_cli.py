from __future__ import annotations

import io
import json
from pathlib import Path

import pytest
from mpmath import mp, mpf

from raagtree.core.metrics import render_metrics
from raagtree.main import EXIT_OK, EXIT_USAGE, build_parser, run
from raagtree.services.storage import read_jsonl


def _run(argv: list[str]) -> tuple[int, list[str]]:
    stream = io.StringIO()
    code = run(argv, stream=stream)
    return code, stream.getvalue().splitlines()


def _records(lines: list[str]) -> list[dict]:
    return [json.loads(line) for line in lines]


def _stderr_error(capsys: pytest.CaptureFixture[str]) -> dict:
    lines = [line for line in capsys.readouterr().err.splitlines() if '"record": "error"' in line]
    assert lines
    return json.loads(lines[-1])


def test_invariants_reports_the_boundary_profile(path7_file: Path):
    code, lines = _run(["invariants", "--input", str(path7_file), "--no-timestamp"])
    assert code == EXIT_OK
    config, report = _records(lines)
    assert config["record"] == "config"
    assert config["subcommand"] == "invariants"
    assert "timestamp" not in config
    assert report["n"] == 7
    assert report["deep"] == [4]
    assert report["upsilon"] == 2
    assert report["shallow"] is False
    assert report["betti_lower_bound"] == 2
    assert report["distances"] == [0, 1, 2, 3, 2, 1, 0]
    assert report["vanishing_class"] is False


def test_json_records_have_sorted_keys(path7_file: Path):
    _, lines = _run(["invariants", "--input", str(path7_file), "--no-timestamp"])
    for line in lines:
        keys = list(json.loads(line))
        assert keys == sorted(keys)


def test_constants_at_requested_precision():
    code, lines = _run(["constants", "--digits", "10", "--no-timestamp"])
    assert code == EXIT_OK
    values = {r["name"]: r["value"] for r in _records(lines)[1:]}
    assert abs(mpf(values["c3"]) - mpf("0.3521992351")) < mpf("1e-9")
    assert abs(mpf(values["d3"]) - mpf("2.069674806")) < mpf("1e-8")
    assert abs(mpf(values["exp_minus_inv_e"]) - mp.exp(-1 / mp.e)) < mpf("1e-9")
    assert _records(lines)[0]["precision"] == 10


def test_exact_and_enumerate_agree_at_four_nodes():
    code, lines = _run(["exact", "--n", "4", "--stat", "prob-deep-root", "--no-timestamp"])
    assert code == EXIT_OK
    assert _records(lines)[1]["value"] == "3/8"

    code, lines = _run(["enumerate", "--n", "4", "--stat", "prob-root-deep", "--stat", "mean-Y", "--no-timestamp"])
    assert code == EXIT_OK
    exhaustive = {r["statistic"]: r["value"] for r in _records(lines)[1:]}
    assert exhaustive == {"prob-root-deep": "3/8", "mean-Y": "3/8"}


def test_bad_integer_is_a_usage_error(capsys: pytest.CaptureFixture[str]):
    code, lines = _run(["enumerate", "--n", "abc", "--stat", "deep-fraction"])
    assert code == EXIT_USAGE
    assert lines == []
    assert _stderr_error(capsys)["flag"] == "--n"


def test_unknown_statistic_and_budget_are_usage_errors(capsys: pytest.CaptureFixture[str]):
    code, _ = _run(["enumerate", "--n", "5", "--stat", "nope"])
    assert code == EXIT_USAGE
    assert _stderr_error(capsys)["flag"] == "--stat"

    code, lines = _run(["enumerate", "--n", "12", "--stat", "deep-fraction"])
    assert code == EXIT_USAGE
    assert lines == []
    assert "12" in _stderr_error(capsys)["error"]


def test_missing_input_file(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    code, _ = _run(["invariants", "--input", str(tmp_path / "missing.txt")])
    assert code == EXIT_USAGE
    assert _stderr_error(capsys)["flag"] == "--input"


def test_nonpositive_workers(capsys: pytest.CaptureFixture[str]):
    code, _ = _run(["constants", "--workers", "0"])
    assert code == EXIT_USAGE
    assert _stderr_error(capsys)["flag"] == "--workers"


def test_sample_is_byte_identical_without_timestamps():
    argv = ["sample", "--n", "6", "--stat", "deep-fraction", "--samples", "500", "--seed", "7", "--no-timestamp"]
    first = _run(argv)
    second = _run(argv)
    assert first == second
    config, report = _records(first[1])
    assert config["seed"] == 7
    assert report["samples"] == 500
    assert report["mode"] == "montecarlo"


def test_sample_seed_defaults_to_settings():
    _, lines = _run(["sample", "--n", "5", "--stat", "deep-fraction", "--samples", "50", "--no-timestamp"])
    assert _records(lines)[0]["seed"] == 20240607


def test_csv_output_starts_with_the_config_comment():
    code, lines = _run(["exact", "--n", "5", "--stat", "mean-y", "--format", "csv", "--no-timestamp"])
    assert code == EXIT_OK
    assert lines[0].startswith("# ")
    assert json.loads(lines[0][2:])["subcommand"] == "exact"
    assert lines[1].split(",")[:2] == ["statistic", "n"]
    assert len(lines) == 3


def test_text_output_uses_key_value_pairs():
    _, lines = _run(["exact", "--n", "4", "--stat", "prob-deep-root", "--format", "text", "--no-timestamp"])
    assert lines[0].startswith("record=config")
    assert "value=3/8" in lines[1]


def test_verify_enumeration_suite():
    code, lines = _run(["verify", "--suite", "enumeration", "--max-n", "5", "--no-timestamp"])
    assert code == EXIT_OK
    suite = _records(lines)[1]
    assert suite["record"] == "suite"
    assert suite["suite"] == "enumeration"
    assert suite["passed"] is True
    assert suite["failures"] == []


def test_betti_on_a_small_tree(tmp_path: Path):
    tree_file = tmp_path / "star.txt"
    tree_file.write_text("4\n1 2\n1 3\n1 4\n", encoding="utf-8")
    matrix = tmp_path / "relations.txt"
    code, lines = _run(["betti", "--input", str(tree_file), "--emit-matrix", str(matrix), "--no-timestamp"])
    assert code == EXIT_OK
    record = _records(lines)[1]
    assert record["record"] == "betti"
    assert record["b1"] == 0
    assert record["upsilon"] == 0
    assert record["vanishing_class"] is True
    assert record["theorem_a"] is True
    assert matrix.exists()


def test_metrics_file_and_saved_report(tmp_path: Path, settings):
    metrics = tmp_path / "metrics.prom"
    code, lines = _run(
        ["enumerate", "--n", "4", "--stat", "deep-fraction", "--metrics-file", str(metrics), "--save", "--no-timestamp"]
    )
    assert code == EXIT_OK
    assert "raagtree_command_latency_seconds" in metrics.read_text(encoding="utf-8")
    run_dir = settings.output_dir / "enumerate" / "latest"
    assert (run_dir / "report.jsonl").read_text(encoding="utf-8").splitlines() == lines
    assert read_jsonl(run_dir / "report.jsonl") == _records(lines)
    assert json.loads((run_dir / "config.json").read_text(encoding="utf-8")) == _records(lines)[0]


def test_rendered_metrics_count_enumerated_trees():
    _run(["enumerate", "--n", "4", "--stat", "deep-fraction", "--no-timestamp"])
    assert 'raagtree_trees_enumerated_total{kind="unrooted"}' in render_metrics()


def test_verify_montecarlo_flags(capsys: pytest.CaptureFixture[str]):
    code, _ = _run(["verify", "--suite", "montecarlo", "--repetitions", "0"])
    assert code == EXIT_USAGE
    assert _stderr_error(capsys)["flag"] == "--repetitions"

    flags = ["--max-n", "7", "--repetitions", "3", "--samples", "400", "--no-timestamp"]
    _, lines = _run(["verify", "--suite", "montecarlo", *flags])
    config, suite = _records(lines)
    assert config["samples"] == 400
    assert suite["metrics"]["repetitions"] == 3
    assert suite["metrics"]["samples"] == 400
    assert set(suite["metrics"]["coverage"]) == {"deep-fraction@7", "upsilon-per-node@7"}


def test_betti_help_names_the_generated_group():
    subcommands = build_parser()._subparsers._group_actions[0]
    helps = {action.dest: action.help for action in subcommands._choices_actions}
    assert "Aut*" in helps["betti"]
    assert "thin inversions" in helps["betti"]

import json

import pytest

from meterflow import jsonio
from meterflow.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli-data")
    code = main(
        [
            "--data-dir",
            str(path),
            "generate",
            "--series",
            "4",
            "--days",
            "150",
            "--seed",
            "3",
            "--start",
            "2014-04-01T00:00:00Z",
            "--anomalies",
            "1",
            "--anomaly-start-day",
            "80",
        ]
    )
    assert code == 0
    assert main(["--data-dir", str(path), "fit", "--train-days", "75"]) == 0
    return path


def test_generate_writes_store_and_labels(data_dir):
    labels = json.loads((data_dir / "labels.json").read_text())
    assert len(labels) == 4
    assert all("ar_coeffs" in l and "anomalies" in l for l in labels)
    assert (data_dir / "store" / "manifest.json").exists()


def test_generate_is_reproducible(tmp_path_factory, capsys):
    out = []
    for name in ("a", "b"):
        path = tmp_path_factory.mktemp(f"repro-{name}")
        code, _, _ = run(
            capsys, "--data-dir", str(path), "generate", "--series", "2", "--days", "40",
            "--seed", "11",
        )
        assert code == 0
        out.append((path / "labels.json").read_text())
    assert out[0] == out[1]


def test_evaluate_ranks_parx_first(data_dir, capsys):
    code, out, _ = run(capsys, "--data-dir", str(data_dir), "--format", "json", "evaluate")
    assert code == 0
    doc = jsonio.loads(out)
    by_method = {row["method"]: row for row in doc["methods"]}
    assert by_method["parx"]["mean_rmse"] < by_method["averaging"]["mean_rmse"]
    assert by_method["parx"]["mean_rmse"] < by_method["three_line"]["mean_rmse"]


def test_evaluate_formats_agree(data_dir, capsys):
    code, json_out, _ = run(capsys, "--data-dir", str(data_dir), "--format", "json", "evaluate")
    assert code == 0
    code, tsv_out, _ = run(capsys, "--data-dir", str(data_dir), "--format", "tsv", "evaluate")
    assert code == 0
    doc = jsonio.loads(json_out)
    rows = [line.split("\t") for line in tsv_out.strip().splitlines()[1:]]
    tsv_values = {row[0]: (float(row[1]), int(row[2])) for row in rows}
    for entry in doc["methods"]:
        assert tsv_values[entry["method"]][0] == entry["mean_rmse"]
        assert tsv_values[entry["method"]][1] == entry["win_count"]


def test_evaluate_on_empty_dir_fails(tmp_path, capsys):
    code, _, err = run(capsys, "--data-dir", str(tmp_path / "empty"), "evaluate")
    assert code == 1
    assert "no meters" in err


def test_detect_epsilon_sets_are_nested(data_dir, capsys):
    code, out, _ = run(
        capsys,
        "--data-dir",
        str(data_dir),
        "--format",
        "json",
        "detect",
        "--epsilon",
        "0.001",
        "0.01",
        "0.1",
        "--from",
        "2014-06-20T00:00:00Z",
    )
    assert code == 0
    doc = jsonio.loads(out)
    days = {
        eps: {d for d, counts in doc["daily_counts"].items() if counts[eps] > 0}
        for eps in ("0.001", "0.01", "0.1")
    }
    assert days["0.001"] <= days["0.01"] <= days["0.1"]


def test_detect_deterministic(data_dir, capsys):
    args = (
        "--data-dir", str(data_dir), "--format", "json", "detect",
        "--epsilon", "0.01", "--from", "2014-07-01T00:00:00Z",
    )
    code, first, _ = run(capsys, *args)
    assert code == 0
    code, second, _ = run(capsys, *args)
    assert code == 0
    assert first == second


def test_forecast_command(data_dir, capsys):
    code, out, _ = run(
        capsys,
        "--data-dir", str(data_dir), "--format", "json",
        "forecast", "--meter", "S00000", "--method", "averaging", "--horizon", "6",
    )
    assert code == 0
    doc = jsonio.loads(out)
    assert len(doc["values"]) == 6


def test_segment_command(data_dir, capsys):
    code, out, _ = run(
        capsys, "--data-dir", str(data_dir), "--format", "json", "segment", "--k", "2"
    )
    assert code == 0
    doc = jsonio.loads(out)
    assert doc["k"] == 2
    assert sum(len(c["members"]) for c in doc["clusters"]) == 4


def test_unknown_meter_fails_with_diagnostic(data_dir, capsys):
    code, _, err = run(capsys, "--data-dir", str(data_dir), "profile", "--meter", "ghost")
    assert code == 1
    assert "ghost" in err


def test_weekend_noise_raises_weekend_anomaly_counts(tmp_path_factory, capsys):
    """Erratic weekend behavior shows up as weekend spikes in the daily
    anomaly counts."""
    from datetime import datetime

    path = tmp_path_factory.mktemp("weekend")
    assert main(
        [
            "--data-dir", str(path), "generate", "--series", "5", "--days", "160",
            "--seed", "5", "--weekend-noise-factor", "6",
            "--start", "2014-04-01T00:00:00Z",
        ]
    ) == 0
    assert main(["--data-dir", str(path), "fit", "--train-days", "120"]) == 0
    capsys.readouterr()
    code, out, _ = run(
        capsys,
        "--data-dir", str(path), "--format", "json", "detect",
        "--epsilon", "0.1", "--from", "2014-07-30T00:00:00Z",
    )
    assert code == 0
    doc = jsonio.loads(out)
    weekend_flags = weekday_flags = 0
    for day, counts in doc["daily_counts"].items():
        if datetime.strptime(day, "%Y-%m-%d").weekday() >= 5:
            weekend_flags += counts["0.1"]
        else:
            weekday_flags += counts["0.1"]
    # the replay window holds 2.5x more weekdays, yet weekends dominate
    assert weekend_flags > weekday_flags


def test_run_workflows_simulated_clock(data_dir, tmp_path, capsys):
    config = tmp_path / "workflows.yaml"
    config.write_text(
        """
workflows:
  - name: nightly
    schedule: {kind: deterministic, interval: daily, anchor: "2014-04-01T02:00:00Z"}
    worklets:
      - {name: housekeeping, kind: housekeeping, op: housekeeping}
      - {name: ping, kind: notify, op: notify, params: {message: nightly done}}
  - name: heavy-batch
    schedule: {kind: queued, interval: daily, anchor: "2014-04-01T03:00:00Z"}
    sim_duration_seconds: 7200
    worklets:
      - {name: housekeeping, kind: housekeeping, op: housekeeping}
"""
    )
    code, out, _ = run(
        capsys,
        "--data-dir", str(data_dir), "--format", "json",
        "run-workflows", "--config", str(config),
        "--simulated-clock", "2014-04-01T00:00:00Z..2014-04-04T00:00:00Z",
        "--step", "3600",
    )
    assert code == 0
    doc = jsonio.loads(out)
    by_wf = {}
    for record in doc["runs"]:
        by_wf.setdefault(record["workflow"], []).append(record)
    assert len(by_wf["nightly"]) == 3  # April 1, 2, 3 at 02:00
    assert len(by_wf["heavy-batch"]) == 3
    assert all(r["status"] == "ok" for r in doc["runs"])
    assert (data_dir / "runs.jsonl").exists()

import csv
import json

import pytest

from moimpute.cli import main

TINY_FLAGS = ["--population-size", "8", "--crossover-pool", "4",
              "--max-generations", "2", "--threshold", "0"]


def test_run_writes_report_and_history(tmp_path, capsys):
    code = main(["run", "--dataset", "iris", "--formulation", "vr",
                 "--ratio", "0.05", "--seed", "1",
                 "--output-dir", str(tmp_path), *TINY_FLAGS])
    assert code == 0
    out = capsys.readouterr().out
    assert "iris_vr_r0.05_simple_overall_test_only_s1" in out
    report_path = tmp_path / "iris_vr_r0.05_simple_overall_test_only_s1.json"
    assert report_path.exists()
    report = json.loads(report_path.read_text())
    assert report["failed"] is False
    history = tmp_path / "iris_vr_r0.05_simple_overall_test_only_s1.history.ndjson"
    assert len(history.read_text().strip().splitlines()) == report["generations"]


def test_run_from_config_file(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "dataset": "iris",
        "formulation": "vr",
        "missing": {"ratio": 0.05, "pattern": "simple", "mtype": "overall",
                    "situation": "test_only"},
        "seed": 2,
        "population_size": 8,
        "crossover_pool": 4,
        "max_generations": 2,
        "threshold": 0.0,
    }))
    assert main(["run", "--config", str(config),
                 "--output-dir", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" /
            "iris_vr_r0.05_simple_overall_test_only_s2.json").exists()


def test_run_failure_exit_code(tmp_path):
    assert main(["run", "--dataset", "/missing/nope.csv",
                 "--output-dir", str(tmp_path), *TINY_FLAGS]) == 1


def test_gen_missing_writes_mask_and_sidecar(tmp_path):
    out = tmp_path / "mask.csv"
    code = main(["gen-missing", "--dataset", "iris", "--ratio", "0.05",
                 "--pattern", "simple", "--type", "overall",
                 "--seed", "3", "--out", str(out)])
    assert code == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["row", "column"]
    assert len(rows) - 1 == 30
    sidecar = json.loads((tmp_path / "mask.json").read_text())
    assert sidecar["missing_cells"] == 30
    assert sidecar["spec"]["seed"] == 3


def test_matrix_and_report_aggregation(tmp_path):
    out_dir = tmp_path / "matrix"
    code = main(["matrix", "--datasets", "iris", "--formulations", "vr",
                 "--ratios", "0.05", "--patterns", "simple",
                 "--types", "overall", "--situations", "test_only",
                 "--seeds", "1", "2", "--output-dir", str(out_dir),
                 *TINY_FLAGS])
    assert code == 0
    assert (out_dir / "aggregate.csv").exists()

    agg = tmp_path / "reagg.csv"
    assert main(["report", "--reports-dir", str(out_dir),
                 "--out", str(agg)]) == 0
    with open(agg) as fh:
        rows = list(csv.DictReader(fh))
    dataset_rows = [r for r in rows if r["category"] == "dataset"]
    assert dataset_rows and dataset_rows[0]["runs"] == "2"


def test_report_with_no_reports_fails(tmp_path):
    assert main(["report", "--reports-dir", str(tmp_path),
                 "--out", str(tmp_path / "agg.csv")]) == 1

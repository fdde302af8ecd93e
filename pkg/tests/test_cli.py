import csv
import json
import math
import struct

import numpy as np
import pytest

import qiprune.verify as verify
from qiprune.cli import (
    CSV_COLUMNS,
    ConfigError,
    RunConfig,
    main,
)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_synthetic_idx_tree(root, subdir, classes, n=40, seed=0):
    rng = np.random.default_rng(seed)
    d = root / subdir
    d.mkdir(parents=True)
    images = rng.integers(1, 255, size=(n, 28, 28), dtype=np.uint8)
    labels = np.array([classes[i % 2] for i in range(n)], dtype=np.uint8)
    (d / "t10k-images-idx3-ubyte").write_bytes(
        struct.pack(">IIII", 2051, n, 28, 28) + images.tobytes()
    )
    (d / "t10k-labels-idx1-ubyte").write_bytes(struct.pack(">II", 2049, n) + labels.tobytes())


class TestRunConfig:
    def test_task_defaults(self):
        assert RunConfig(task="mnist49").n_qubits == 8
        assert RunConfig(task="bas").n_qubits == 4

    def test_lambda_and_q(self):
        cfg = RunConfig(task="bas")
        assert cfg.lam == pytest.approx(0.97)
        assert cfg.q == pytest.approx(math.exp(0.03))

    def test_hash_excludes_paths(self):
        a = RunConfig(task="bas", out_dir="x")
        b = RunConfig(task="bas", out_dir="y")
        assert a.hash() == b.hash()
        c = RunConfig(task="bas", delta=0.02)
        assert a.hash() != c.hash()

    def test_validation(self):
        with pytest.raises(ConfigError, match="task"):
            RunConfig(task="nope")
        with pytest.raises(ConfigError, match="sigma"):
            RunConfig(task="bas", sigma=-1.0)
        with pytest.raises(ConfigError, match="delta"):
            RunConfig(task="bas", delta=0.0)


class TestPruneCommand:
    def test_bas_end_to_end(self, tmp_path, capsys):
        code = main(
            [
                "prune",
                "--task",
                "bas",
                "--delta",
                "0.01",
                "--sigma",
                "0.001",
                "--seed",
                "0",
                "--train-epochs",
                "1",
                "--train-lr",
                "0.1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        row_csv = tmp_path / "row_bas_d0.01_s0.001_seed0.csv"
        report_json = tmp_path / "report_bas_d0.01_s0.001_seed0.json"
        assert row_csv.exists() and report_json.exists()
        rows = read_rows(row_csv)
        assert len(rows) == 1
        assert tuple(rows[0].keys()) == CSV_COLUMNS
        doc = json.loads(report_json.read_text())
        assert doc["report"]["violations"] == 0
        assert doc["certificate"]["passed"] is True
        assert doc["config_hash"] == doc["report"]["config_hash"]
        assert "replace=" in capsys.readouterr().out

    def test_sigma_zero_gives_eighty_pct_and_zero_drift(self, tmp_path):
        code = main(
            [
                "prune",
                "--task",
                "bas",
                "--sigma",
                "0",
                "--train-epochs",
                "0",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        row = read_rows(tmp_path / "row_bas_d0.01_s0.0_seed0.csv")[0]
        assert float(row["replace_pct"]) == 80.0
        assert float(row["metric_drop"]) == 0.0
        doc = json.loads((tmp_path / "report_bas_d0.01_s0.0_seed0.json").read_text())
        assert doc["certificate"]["max_trace_distance"] == 0.0

    def test_rerun_reproduces_bytes(self, tmp_path):
        args = [
            "prune",
            "--task",
            "bas",
            "--train-epochs",
            "1",
            "--out",
            str(tmp_path),
        ]
        assert main(args) == 0
        first = {
            p.name: p.read_bytes() for p in tmp_path.iterdir()
        }
        assert main(args) == 0
        second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
        assert first == second

    def test_unknown_task_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["prune", "--task", "unknown"])
        assert exc.value.code == 2

    def test_missing_task_config_error(self, capsys):
        assert main(["prune"]) == 2
        assert "task is required" in capsys.readouterr().err

    def test_missing_data_dir_for_idx_task(self, capsys):
        assert main(["prune", "--task", "mnist49"]) == 2
        assert "data" in capsys.readouterr().err

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"task": "bas", "sigma": 0.0, "train_epochs": 0}))
        code = main(
            ["prune", "--config", str(cfg), "--delta", "0.02", "--out", str(tmp_path / "out")]
        )
        assert code == 0
        assert (tmp_path / "out" / "row_bas_d0.02_s0.0_seed0.csv").exists()


class TestSweepCommand:
    def test_default_grid_matches_table_shape(self, tmp_path):
        code = main(
            ["sweep", "--task", "bas", "--train-epochs", "0", "--seeds", "0", "--out", str(tmp_path)]
        )
        assert code == 0
        rows = read_rows(tmp_path / "results_bas_seed0.csv")
        # 2 deltas x 4 sigmas: the per-dataset shape of the published tables
        assert len(rows) == 8
        assert [r["delta"] for r in rows] == ["0.01"] * 4 + ["0.02"] * 4
        assert len(list(tmp_path.glob("report_bas_*.json"))) == 8

    def test_multi_seed_files(self, tmp_path):
        code = main(
            [
                "sweep",
                "--task",
                "bas",
                "--train-epochs",
                "0",
                "--deltas",
                "0.01",
                "--sigmas",
                "0.001,0.01",
                "--seeds",
                "0,1",
                "--out",
                str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "results_bas_seed0.csv").exists()
        assert (tmp_path / "results_bas_seed1.csv").exists()


class TestVerifyCommand:
    def test_exit_zero_and_report(self, tmp_path):
        out = tmp_path / "verify.json"
        assert main(["verify", "--seed", "0", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["passed"] is True

    def test_corrupted_fixture_exits_one_but_writes_report(self, tmp_path, monkeypatch):
        monkeypatch.setitem(verify.PUBLISHED_TABLES["bas"], "n_rot", 9999)
        out = tmp_path / "verify.json"
        assert main(["verify", "--seed", "0", "--out", str(out)]) == 1
        assert json.loads(out.read_text())["passed"] is False


class TestReportCommand:
    def _sweep_csv(self, tmp_path):
        path = tmp_path / "results.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for delta in (0.01, 0.02):
                for sigma in (0.001, 0.01):
                    writer.writerow(
                        ["bas", delta, sigma, 64.0, 64.0, 0.0, 50.0, 1.2, 1.0, 0.004]
                    )
        return path

    def test_three_panels(self, tmp_path):
        path = self._sweep_csv(tmp_path)
        out = tmp_path / "panels"
        assert main(["report", str(path), "--out", str(out)]) == 0
        panels = sorted(p.name for p in out.iterdir())
        assert panels == ["panel_dq_max_repl.csv", "panel_metric_drop.csv", "panel_replace_pct.csv"]
        rows = read_rows(out / "panel_replace_pct.csv")
        assert len(rows) == 4

    def test_missing_column_schema_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("dataset,delta\nbas,0.01\n")
        assert main(["report", str(bad), "--out", str(tmp_path / "o")]) == 2
        assert "missing columns" in capsys.readouterr().err

    def test_deterministic_bytes(self, tmp_path):
        path = self._sweep_csv(tmp_path)
        out1, out2 = tmp_path / "p1", tmp_path / "p2"
        main(["report", str(path), "--out", str(out1)])
        main(["report", str(path), "--out", str(out2)])
        for name in ("panel_replace_pct.csv", "panel_metric_drop.csv", "panel_dq_max_repl.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestDatasetCommand:
    def test_generate_bas(self, tmp_path):
        out = tmp_path / "bas.json"
        assert main(["dataset", "generate", "--task", "bas", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["name"] == "bas" and len(doc["samples"]) == 28

    def test_inspect_bas(self, capsys):
        assert main(["dataset", "inspect", "--task", "bas"]) == 0
        out = capsys.readouterr().out
        assert "28 samples" in out and "+1: 14" in out

    def test_inspect_idx_with_synthetic_tree(self, tmp_path, capsys):
        write_synthetic_idx_tree(tmp_path, "mnist", (4, 9))
        assert main(["dataset", "inspect", "--task", "mnist49", "--data-dir", str(tmp_path)]) == 0
        assert "40 samples" in capsys.readouterr().out

    def test_generate_requires_out(self, capsys):
        assert main(["dataset", "generate", "--task", "bas"]) == 2
        assert "--out" in capsys.readouterr().err


def test_env_var_data_dir(tmp_path, monkeypatch, capsys):
    write_synthetic_idx_tree(tmp_path, "fashion", (5, 9))
    monkeypatch.setenv("QIPRUNE_DATA_DIR", str(tmp_path))
    assert main(["dataset", "inspect", "--task", "fashion_sb"]) == 0
    assert "40 samples" in capsys.readouterr().out

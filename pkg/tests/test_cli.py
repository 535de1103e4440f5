import json
import re

import numpy as np
import pytest

from cenreg.cli import main


def write_worked_example(tmp_path):
    (tmp_path / "m.mtx").write_text(
        "%%MatrixMarket matrix coordinate real general\n"
        "3 2 6\n"
        "1 1 1.0\n2 1 1.0\n3 1 1.0\n"
        "1 2 1.0\n2 2 3.0\n3 2 5.0\n"
    )
    (tmp_path / "y.csv").write_text("y\n1.0\n3.0\n5.0\n")


class TestFitCommand:
    def test_worked_example(self, tmp_path, capsys):
        write_worked_example(tmp_path)
        code = main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--center", "--intercept-col", "0",
            "--out", str(tmp_path / "model.json"),
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "beta_original" in out
        doc = json.loads((tmp_path / "model.json").read_text())
        beta = doc["beta_original"]
        assert abs(beta[0]) < 1e-12 and abs(beta[1] - 1.0) < 1e-12
        assert doc["k_hat_sq"] < 1e-24
        assert doc["provenance"]["matrix_file"].endswith("m.mtx")

    def test_scale_without_center(self, tmp_path):
        (tmp_path / "m.mtx").write_text(
            "%%MatrixMarket matrix coordinate real general\n"
            "3 2 5\n"
            "1 1 1.0\n2 1 2.0\n"
            "1 2 1.0\n2 2 3.0\n3 2 5.0\n"
        )
        (tmp_path / "y.csv").write_text("y\n1.0\n3.0\n5.0\n")
        code = main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--scale",
            "--out", str(tmp_path / "model.json"),
        ])
        assert code == 0
        doc = json.loads((tmp_path / "model.json").read_text())
        assert doc["plan"]["scale_enabled"] is True
        assert doc["plan"]["center_enabled"] is False
        assert all(m == 0.0 for m in doc["plan"]["means"])

    def test_missing_matrix_flag_exits_2(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--response", "y.csv", "--out", "m.json"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_pipeline_rejection_exits_1(self, tmp_path, capsys):
        # centered fit with no intercept cannot be back-transformed
        write_worked_example(tmp_path)
        code = main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--center",
            "--out", str(tmp_path / "model.json"),
        ])
        assert code == 1
        assert "to_original" in capsys.readouterr().err

    def test_parse_error_exits_2(self, tmp_path, capsys):
        write_worked_example(tmp_path)
        (tmp_path / "y.csv").write_text("y\n1.0\noops\n")
        code = main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--out", str(tmp_path / "model.json"),
        ])
        assert code == 2
        assert "y.csv:3" in capsys.readouterr().err


class TestPredictCommand:
    def test_round_trip_predictions(self, tmp_path, capsys):
        write_worked_example(tmp_path)
        assert main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--center", "--intercept-col", "0",
            "--out", str(tmp_path / "model.json"),
        ]) == 0
        assert main([
            "predict", "--model", str(tmp_path / "model.json"),
            "--matrix", str(tmp_path / "m.mtx"),
            "--out", str(tmp_path / "pred.csv"),
        ]) == 0
        lines = (tmp_path / "pred.csv").read_text().splitlines()
        assert lines[0] == "y_hat"
        got = np.array([float(s) for s in lines[1:]])
        assert np.abs(got - [1.0, 3.0, 5.0]).max() < 1e-9

    def test_predict_reproduces_training_fit(self, tmp_path):
        # fit -> predict on the training matrix matches the fit's own yhat
        assert main([
            "simulate", "--n", "120", "--p", "6", "--density", "0.3",
            "--seed", "61", "--intercept", "--out-prefix", str(tmp_path / "d"),
        ]) == 0
        assert main([
            "fit", "--matrix", str(tmp_path / "d.mtx"),
            "--response", str(tmp_path / "d.y.csv"),
            "--center", "--intercept-col", "0",
            "--out", str(tmp_path / "model.json"),
        ]) == 0
        assert main([
            "predict", "--model", str(tmp_path / "model.json"),
            "--matrix", str(tmp_path / "d.mtx"),
            "--out", str(tmp_path / "pred.csv"),
        ]) == 0
        from cenreg import fit, read_matrix_market
        from cenreg.model_io import read_vector_csv

        M = read_matrix_market(str(tmp_path / "d.mtx"))
        y = read_vector_csv(str(tmp_path / "d.y.csv"))
        res = fit(M, y, center=True, intercept_col=0)
        internal_yhat = y - res.residuals
        got = read_vector_csv(str(tmp_path / "pred.csv"))
        scale = max(np.abs(internal_yhat).max(), 1e-30)
        assert np.abs(got - internal_yhat).max() <= 1e-12 * scale

    def test_column_mismatch_exits_1(self, tmp_path, capsys):
        write_worked_example(tmp_path)
        assert main([
            "fit", "--matrix", str(tmp_path / "m.mtx"),
            "--response", str(tmp_path / "y.csv"),
            "--center", "--intercept-col", "0",
            "--out", str(tmp_path / "model.json"),
        ]) == 0
        (tmp_path / "wide.mtx").write_text(
            "%%MatrixMarket matrix coordinate real general\n"
            "2 3 1\n1 1 1.0\n"
        )
        code = main([
            "predict", "--model", str(tmp_path / "model.json"),
            "--matrix", str(tmp_path / "wide.mtx"),
            "--out", str(tmp_path / "pred.csv"),
        ])
        assert code == 1
        err = capsys.readouterr().err
        assert "2" in err and "3" in err


class TestSimulateCommand:
    def test_full_density_entry_count(self, tmp_path):
        assert main([
            "simulate", "--n", "100", "--p", "10", "--density", "1.0",
            "--seed", "4", "--out-prefix", str(tmp_path / "sim"),
        ]) == 0
        header = (tmp_path / "sim.mtx").read_text().splitlines()[1]
        assert header == "100 10 1000"
        for suffix in (".y.csv", ".w.csv", ".beta.csv"):
            assert (tmp_path / ("sim" + suffix)).exists()

    def test_deterministic_bytes(self, tmp_path):
        for prefix in ("a", "b"):
            assert main([
                "simulate", "--n", "50", "--p", "5", "--density", "0.2",
                "--seed", "123", "--intercept",
                "--out-prefix", str(tmp_path / prefix),
            ]) == 0
        for suffix in (".mtx", ".y.csv", ".w.csv", ".beta.csv"):
            assert (tmp_path / ("a" + suffix)).read_bytes() == \
                (tmp_path / ("b" + suffix)).read_bytes()

    def test_invalid_density_exits_2(self, tmp_path, capsys):
        code = main([
            "simulate", "--n", "10", "--p", "2", "--density", "7",
            "--seed", "1", "--out-prefix", str(tmp_path / "x"),
        ])
        assert code == 2
        assert "density" in capsys.readouterr().err


class TestBenchCommand:
    def test_tiny_grid(self, tmp_path, capsys):
        assert main([
            "bench", "--n-list", "1500", "--density-list", "0.05,0.2",
            "--p", "8", "--seed", "7", "--repeats", "3",
            "--out", str(tmp_path / "bench.csv"),
        ]) == 0
        text = (tmp_path / "bench.csv").read_text()
        data = [l for l in text.splitlines() if not l.startswith("#")]
        assert len(data) == 3  # header + two cells
        assert (tmp_path / "bench.csv.long.csv").exists()
        assert "status" in data[0]
        assert all(row.endswith("ok") for row in data[1:])


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert re.match(r"\d+\.\d+\.\d+", capsys.readouterr().out)

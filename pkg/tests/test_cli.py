import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from focktoeplitz import cli
from focktoeplitz.cli import ConfigError, ExperimentConfig, main
from focktoeplitz.fock import FockBasis
from focktoeplitz.formats import load_matrix


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


GAUSS = {"grid": {"extent": 16, "points": 256}, "basis": {"dimension": 30},
         "symbol": {"kind": "gaussian", "c": 1.0}}


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({})
        assert cfg.alpha == 1.0 and cfg.points == 256 and cfg.dimension == 40 and cfg.lattice_radius == 3

    @pytest.mark.parametrize("bad", [
        {"bogus": 1},
        {"grid": {"extent": 16, "points": 256, "spacing": 1}},
        {"symbol": {"kind": "gaussian", "c": 1, "width": 3}},
        {"symbol": {"kind": "triangle"}},
        {"alpha": -1},
        {"alpha": "one"},
        {"grid": {"points": 100}},
        {"schatten_p": [0.5]},
        {"tolerances": {"made_up": 1e-3}},
        {"symbol": {"kind": "gaussian"}},
        {"basis": {"dimension": 0}},
    ])
    def test_rejects(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(bad)

    def test_tolerance_override(self):
        cfg = ExperimentConfig.from_dict({"tolerances": {"berezin": 1e-3}})
        assert cfg.tolerances["berezin"] == 1e-3 and cfg.tolerances["semigroup"] == 1e-9

    def test_relative_grid_file(self, tmp_path):
        cfg = ExperimentConfig.from_dict({"symbol": {"kind": "grid_file", "path": "s.csv"}}, tmp_path)
        assert cfg.symbol.path == str((tmp_path / "s.csv").resolve())

    def test_threads(self, monkeypatch):
        monkeypatch.setenv("FTZ_THREADS", "3")
        assert cli.thread_count() == 3
        monkeypatch.setenv("FTZ_THREADS", "zero")
        with pytest.raises(ConfigError):
            cli.thread_count()


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        code = main(["transform", "--config", write_config(tmp_path, {"nope": 1}), "--out", str(tmp_path)])
        assert code == 2
        assert "nope" in capsys.readouterr().err

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{not json")
        assert main(["transform", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_missing_config(self, tmp_path):
        assert main(["transform", "--config", str(tmp_path / "none.json"), "--out", str(tmp_path)]) == 3

    def test_missing_symbol_file(self, tmp_path):
        cfg = write_config(tmp_path, {"symbol": {"kind": "grid_file", "path": "missing.csv"}})
        assert main(["transform", "--config", cfg, "--out", str(tmp_path)]) == 3

    def test_unwritable_output(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = write_config(tmp_path, {"grid": {"points": 64}})
        assert main(["transform", "--config", cfg, "--out", str(blocker / "sub")]) == 3

    def test_assertion_failure(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {**GAUSS, "tolerances": {"berezin": 0.0}})
        assert main(["toeplitz", "--config", cfg, "--out", str(tmp_path)]) == 1
        assert "berezin-heat-identity" in capsys.readouterr().err

    def test_config_required(self, tmp_path):
        assert main(["bounds", "--out", str(tmp_path)]) == 2

    def test_bad_threads(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FTZ_THREADS", "-2")
        assert main(["transform", "--config", write_config(tmp_path, {}), "--out", str(tmp_path)]) == 2


class TestCommands:
    def test_transform(self, tmp_path):
        cfg = write_config(tmp_path, {"symbol": {"kind": "plane_wave", "frequency": [1, 0]},
                                      "outputs": {"symbol_csv": str(tmp_path / "sym.csv")}})
        assert main(["transform", "--config", cfg, "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "transform.json").read_text())
        assert rep["passed"] and rep["results"]["round_trip_error"] <= 1e-12
        assert all(a["anchor"] for a in rep["assertions"])
        assert (tmp_path / "sym.csv").exists()

    def test_toeplitz_with_cache(self, tmp_path):
        cfg = write_config(tmp_path, {**GAUSS, "outputs": {"matrix": str(tmp_path / "T.ftlz")}})
        assert main(["toeplitz", "--config", cfg, "--out", str(tmp_path)]) == 0
        T = load_matrix(tmp_path / "T.ftlz", 30)
        assert T.basis == FockBasis(1.0, 30)
        assert abs(T.entries[0, 0] - 0.5) <= 1e-12
        rows = read_csv(tmp_path / "berezin.csv")
        assert rows[0][-1] == "error" and len(rows) > 10

    def test_decompose_constant(self, tmp_path):
        cfg = write_config(tmp_path, {"basis": {"dimension": 30}, "symbol": {"kind": "constant"},
                                      "lattice_radius": 0})
        assert main(["decompose", "--config", cfg, "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "decompose.json").read_text())
        assert rep["results"]["nonzero_pieces"] == 1
        assert rep["results"]["residuals"][0] <= 1e-8
        assert read_csv(tmp_path / "residuals.csv")[0] == ["r", "residual"]

    def test_bounds_csv_columns(self, tmp_path):
        cfg = write_config(tmp_path, GAUSS)
        assert main(["bounds", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "bounds.csv")
        assert rows[0] == ["bound_name", "bound_value", "measured", "ratio"]
        names = [r[0] for r in rows[1:]]
        assert "schur" in names and "main" in names
        schur = next(r for r in rows[1:] if r[0] == "schur")
        assert float(schur[2]) <= float(schur[1])

    def test_schatten(self, tmp_path):
        cfg = write_config(tmp_path, {**GAUSS, "basis": {"dimension": 40}, "schatten_p": [1]})
        assert main(["schatten", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "schatten.csv")
        plain = next(r for r in rows[1:] if r[0] == "plain")
        assert abs(float(plain[2]) - np.pi) <= 1e-6 and abs(float(plain[3]) - 1) <= 1e-6

    def test_schatten_constant_flags_divergence(self, tmp_path):
        cfg = write_config(tmp_path, {"basis": {"dimension": 10}, "symbol": {"kind": "constant"},
                                      "schatten_p": [2]})
        assert main(["schatten", "--config", cfg, "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "schatten.csv")
        assert all(r[5] == "True" for r in rows[1:])

    def test_carleson(self, tmp_path):
        cfg = write_config(tmp_path, {"symbol": {"kind": "constant"}})
        assert main(["carleson", "--config", cfg, "--out", str(tmp_path)]) == 0
        rep = json.loads((tmp_path / "carleson.json").read_text())
        assert abs(rep["results"]["heat"] - 1) <= 1e-10

    def test_selftest(self, tmp_path):
        assert main(["selftest", "--out", str(tmp_path)]) == 0
        rows = read_csv(tmp_path / "selftest.csv")
        assert len(rows) > 40 and all(r[2] == "True" for r in rows[1:])

    def test_grid_file_symbol(self, tmp_path):
        from focktoeplitz.field import make_grid
        from focktoeplitz.formats import export_symbol_csv
        from focktoeplitz.symbols import gaussian, sample_symbol

        export_symbol_csv(sample_symbol(gaussian(1.0), make_grid(16, 256)), tmp_path / "g.csv")
        cfg = write_config(tmp_path, {"basis": {"dimension": 30}, "symbol": {"kind": "grid_file", "path": "g.csv"}})
        assert main(["toeplitz", "--config", cfg, "--out", str(tmp_path)]) == 0


class TestDeterminism:
    def test_byte_identical_reports(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, {**GAUSS, "basis": {"dimension": 12}, "lattice_radius": 1})
        outs = []
        for threads in ("1", "1", "4"):
            monkeypatch.setenv("FTZ_THREADS", threads)
            out = tmp_path / f"o{len(outs)}"
            assert main(["decompose", "--config", cfg, "--out", str(out)]) == 0
            outs.append(out)
        assert (outs[0] / "decompose.json").read_bytes() == (outs[1] / "decompose.json").read_bytes()
        a = json.loads((outs[0] / "decompose.json").read_text())["results"]["residuals"]
        b = json.loads((outs[2] / "decompose.json").read_text())["results"]["residuals"]
        assert np.allclose(a, b, rtol=1e-12, atol=1e-300)

    def test_config_echoed(self, tmp_path):
        raw = {"grid": {"points": 64}, "heat_t": 0.5}
        main(["transform", "--config", write_config(tmp_path, raw), "--out", str(tmp_path)])
        assert json.loads((tmp_path / "transform.json").read_text())["config"] == raw


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "focktoeplitz.cli", "selftest", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr


def test_argparse_rejects_positional_extras(tmp_path):
    with pytest.raises(SystemExit):
        main(["transform", "extra", "--config", "x.json"])

"""Integration tests for the wqed-ladder command line."""

import json
from pathlib import Path
from typing import List, Optional

import numpy as np
import pytest

from wqed_ladder import cli
from wqed_ladder.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, run_cli
from wqed_ladder.config import SimulationConfig
from wqed_ladder.exceptions import SingularSystemError
from wqed_ladder.validation import SuiteResult, ValidationReport
from wqed_ladder.writers.csv_writer import read_csv


class TestCommandLine:
    """End-to-end runs of every subcommand on coarse grids."""

    @pytest.fixture(autouse=True)
    def _workspace(self, tmp_path: Path, small_config: SimulationConfig) -> None:
        self.config_path = tmp_path / "small.json"
        self.config_path.write_text(json.dumps(small_config.to_dict()), encoding="utf-8")
        self.output_dir = tmp_path / "results"

    def run(self, *args: str, output_dir: Optional[Path] = None) -> int:
        target = output_dir or self.output_dir
        argv: List[str] = [
            "--config", str(self.config_path), "--output-dir", str(target), "--threads", "1",
        ]
        return run_cli(argv + list(args))

    def table(self, name: str, output_dir: Optional[Path] = None) -> dict:
        path = (output_dir or self.output_dir) / f"{name}.csv"
        return read_csv(path.read_text(encoding="utf-8"))

    def test_ddi_curve(self) -> None:
        """Test the J(L) table, its header and σ = 0 agreement."""
        assert self.run("ddi-curve", "--sigma", "0") == EXIT_OK
        parsed = self.table("ddi_curve")
        assert parsed["metadata"]["schema"] == "wqed-ladder/table/v1/ddi_curve"
        assert parsed["columns"] == [
            "L_nm", "kL_over_pi", "J_periodic", "J_disordered_mean", "J_stderr"
        ]
        rows = {float(r[0]): r for r in parsed["rows"]}
        assert len(rows) == 13
        assert float(rows[50.0][2]) == pytest.approx(6.147, abs=1e-3)
        for row in parsed["rows"]:
            assert row[2] == row[3]
        manifest = json.loads((self.output_dir / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["command"] == "ddi-curve"
        assert manifest["schema"] == "wqed-ladder/manifest/v1"
        assert "ddi_curve.csv" in manifest["outputs"]

    def test_spectrum(self, capsys: pytest.CaptureFixture) -> None:
        """Test periodic and disordered spectra with a summary line."""
        assert self.run("spectrum", "--disordered") == EXIT_OK
        periodic = self.table("spectrum_periodic_N2")
        disordered = self.table("spectrum_disordered_N2")
        assert periodic["columns"][:4] == ["delta", "P2", "P4", "xi"]
        assert len(periodic["rows"]) == 121
        assert len(disordered["rows"]) == 121
        assert disordered["metadata"]["n_realizations"] == "4"
        p4 = np.array([float(r[2]) for r in periodic["rows"]])
        assert p4.max() == pytest.approx(0.7386, abs=2e-3)
        assert "N=2 periodic: max P4" in capsys.readouterr().out

    def test_rerun_is_bit_identical(self, tmp_path: Path) -> None:
        """Test that a manifest replays to identical files, whatever the parallelism."""
        assert self.run("--seed", "17", "spectrum", "--disordered", "--no-periodic") == EXIT_OK
        manifest = self.output_dir / "manifest.json"
        original = (self.output_dir / "spectrum_disordered_N2.csv").read_bytes()

        serial_dir = tmp_path / "serial"
        assert run_cli(["--output-dir", str(serial_dir), "rerun", str(manifest)]) == EXIT_OK
        assert (serial_dir / "spectrum_disordered_N2.csv").read_bytes() == original

        threaded_dir = tmp_path / "threaded"
        argv = [
            "--output-dir", str(threaded_dir), "--threads", "2", "--backend", "threading",
            "rerun", str(manifest),
        ]
        assert run_cli(argv) == EXIT_OK
        assert (threaded_dir / "spectrum_disordered_N2.csv").read_bytes() == original
        replayed = json.loads((threaded_dir / "manifest.json").read_text(encoding="utf-8"))
        assert replayed["master_seed"] == 17

    def test_pmax(self) -> None:
        """Test P_max for N = 1, 2."""
        assert self.run("pmax", "--n-max", "2") == EXIT_OK
        rows = self.table("pmax_periodic")["rows"]
        assert [r[0] for r in rows] == ["1", "2"]
        assert float(rows[0][1]) == pytest.approx(0.58185, abs=1e-4)
        assert float(rows[1][2]) == pytest.approx(25.6, abs=1.0)
        assert rows[1][3] == "false"

    def test_efficiency_map(self) -> None:
        """Test the long-format ξ map."""
        assert self.run("efficiency-map", "--n", "2") == EXIT_OK
        parsed = self.table("efficiency_map_periodic_N2")
        assert parsed["columns"] == ["delta", "L_over_lambda", "xi_mean", "xi_stderr"]
        assert len(parsed["rows"]) == 2 * 201
        xi = [float(r[2]) for r in parsed["rows"] if float(r[1]) == 0.025]
        assert max(xi) > 0.8

    def test_localization(self) -> None:
        """Test the localization table with the conventional estimator."""
        assert self.run("localization", "--sigma", "0.1", "--conventional") == EXIT_OK
        parsed = self.table("localization")
        assert parsed["columns"][-2:] == ["L_conventional", "L_conventional_error"]
        (row,) = parsed["rows"]
        assert row[0] == "2"
        assert float(row[2]) == 30.0
        assert float(row[5]) > 0
        assert float(row[7]) > 0
        assert float(row[8]) >= 0

    def test_validate(self, capsys: pytest.CaptureFixture) -> None:
        """Test a short validation run."""
        assert self.run("validate", "--cases", "10") == EXIT_OK
        report = json.loads((self.output_dir / "validation.json").read_text(encoding="utf-8"))
        assert report["passed"] is True
        assert "PASSED" in capsys.readouterr().out

    def test_validation_failure_exit_code(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test exit code 3 on a failed suite."""

        def failing(seed: int, cases: int) -> ValidationReport:
            suite = SuiteResult("flux_conservation", 1e-10)
            suite.record(1.0, "broken")
            return ValidationReport(seed=seed, suites=[suite])

        monkeypatch.setattr(cli, "run_validation", failing)
        assert self.run("validate", "--cases", "1") == EXIT_VALIDATION
        assert (self.output_dir / "validation.json").exists()

    def test_numerical_failure_exit_code(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Test exit code 2 on a singular system."""

        def singular(problem, grid):  # type: ignore[no-untyped-def]
            raise SingularSystemError("singular transport matrix")

        monkeypatch.setattr(cli, "spectrum", singular)
        assert self.run("spectrum") == EXIT_NUMERICAL

    def test_profile(self) -> None:
        """Test that --profile writes an HTML report."""
        assert self.run("--profile", "pmax", "--n-max", "1") == EXIT_OK
        assert (self.output_dir / "profile.html").exists()

    def test_plot(self) -> None:
        """Test that --plot adds SVG files."""
        pytest.importorskip("matplotlib")
        assert self.run("--plot", "pmax", "--n-max", "2") == EXIT_OK
        assert (self.output_dir / "pmax_periodic.svg").exists()


class TestUsageErrors:
    """Tests for exit code 1."""

    def test_unknown_option(self) -> None:
        """Test an unknown flag."""
        assert run_cli(["spectrum", "--colour", "red"]) == EXIT_USAGE

    def test_invalid_config_value(self, tmp_path: Path) -> None:
        """Test a configuration file with an invalid value."""
        path = tmp_path / "bad.toml"
        path.write_text("n_realizations = 0\n", encoding="utf-8")
        assert run_cli(["--config", str(path), "validate"]) == EXIT_USAGE

    def test_missing_manifest(self, tmp_path: Path) -> None:
        """Test rerun of a file that does not exist."""
        assert run_cli(["rerun", str(tmp_path / "absent.json")]) == EXIT_USAGE

    def test_foreign_manifest(self, tmp_path: Path) -> None:
        """Test rerun of a manifest with another schema."""
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"schema": "other"}), encoding="utf-8")
        argv = ["--output-dir", str(tmp_path / "out"), "rerun", str(path)]
        assert run_cli(argv) == EXIT_USAGE

    def test_nothing_to_compute(self, tmp_path: Path) -> None:
        """Test spectrum with both chain kinds disabled."""
        argv = ["--output-dir", str(tmp_path), "spectrum", "--no-periodic"]
        assert run_cli(argv) == EXIT_USAGE

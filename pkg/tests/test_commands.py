"""Tests for the command-line surface."""

import json
from unittest.mock import patch

import pytest
from typer.testing import CliRunner

from anharmonic_cli.commands import sweep
from anharmonic_cli.commands.validate import (
    CheckResult,
    check_attractive_statistics,
    check_g2_bounded,
    check_truncation_convergence,
    check_weak_quartic_map,
)
from anharmonic_cli.config import ModelSection, RunConfig, SweepSection, TruncationSection
from anharmonic_cli.errors import TruncationOverflowError
from anharmonic_cli.main import app

runner = CliRunner()


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("ANHARMONIC_OUT", raising=False)
    monkeypatch.delenv("ANHARMONIC_THREADS", raising=False)


class TestSweepAxis:
    def test_log_axis(self):
        assert list(sweep.axis(1.0, 100.0, 3, "log")) == pytest.approx([1.0, 10.0, 100.0])

    def test_single_point(self):
        assert list(sweep.axis(0.5, 2.0, 1, "linear")) == [0.5]


class TestSweepObservables:
    def test_naive_observable_ignores_nonlinearity(self):
        assert sweep.g2_point(RunConfig(), "naive", 5.0, 1.0) == pytest.approx(2.0, abs=1e-8)

    def test_xdot_harmonic_limit(self):
        assert sweep.g2_point(RunConfig(), "xdot", 1e-9, 0.5) == pytest.approx(2.0, abs=1e-6)

    def test_frame_layout(self):
        config = RunConfig(sweep=SweepSection(u_points=2, t_points=3))
        frame = sweep.sweep_frame(config)
        assert list(frame.columns) == ["U", "T", "g2"]
        assert len(frame) == 6


class TestSweepCommand:
    def test_writes_table_and_summary(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("[sweep]\nu_points = 2\nt_points = 2\n")

        result = runner.invoke(app, ["sweep-g2", "--config", str(config), "--out", str(tmp_path / "out")])

        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "sweep_kerr.csv").is_file()
        summary = json.loads((tmp_path / "out" / "sweep_kerr.json").read_text())
        assert summary["data"]["points"] == 4

    def test_rerun_is_byte_identical(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("[sweep]\nu_points = 2\nt_points = 2\n")
        args = ["sweep-g2", "--config", str(config), "--out", str(tmp_path / "out")]

        assert runner.invoke(app, args).exit_code == 0
        first = (tmp_path / "out" / "sweep_kerr.csv").read_bytes()
        assert runner.invoke(app, args).exit_code == 0

        assert (tmp_path / "out" / "sweep_kerr.csv").read_bytes() == first


class TestLevelsCommand:
    def test_both_branches(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("[levels]\nu_max = 0.02\nu_points = 2\ncount = 3\n")

        result = runner.invoke(app, ["levels", "-c", str(config), "-o", str(tmp_path)])

        assert result.exit_code == 0, result.output
        summary = json.loads((tmp_path / "levels.json").read_text())
        assert summary["data"]["branches"] == ["attractive", "repulsive"]
        assert summary["data"]["rows"] == 4


class TestExitCodes:
    def test_config_error(self, tmp_path):
        result = runner.invoke(app, ["spectrum", "--config", str(tmp_path / "missing.toml")])

        assert result.exit_code == 1
        assert "Error" in result.output

    @patch("anharmonic_cli.commands.spectrum.system")
    def test_numerical_error(self, mock_system, tmp_path):
        mock_system.prepare_system.side_effect = TruncationOverflowError("too hot")

        result = runner.invoke(app, ["spectrum", "--out", str(tmp_path)])

        assert result.exit_code == 2
        assert "too hot" in result.output

    @patch("anharmonic_cli.commands.validate.run_checks")
    def test_failed_validation(self, mock_checks, tmp_path):
        mock_checks.return_value = [
            CheckResult("spectrum-sum-rule", 0.5, 1e-2, False),
            CheckResult("weak-quartic-map-max", 0.4, 0.2, False, required=False),
        ]

        result = runner.invoke(app, ["validate", "--out", str(tmp_path)])

        assert result.exit_code == 3
        report = json.loads((tmp_path / "validation.json").read_text())
        assert [c["name"] for c in report["data"]["checks"]] == ["spectrum-sum-rule", "weak-quartic-map-max"]

    @patch("anharmonic_cli.commands.validate.run_checks")
    def test_informational_failure_passes(self, mock_checks, tmp_path):
        mock_checks.return_value = [
            CheckResult("spectrum-sum-rule", 1e-3, 1e-2, True),
            CheckResult("weak-quartic-map-max", 0.4, 0.2, False, required=False),
        ]

        result = runner.invoke(app, ["validate", "--out", str(tmp_path)])

        assert result.exit_code == 0, result.output


class TestValidateChecks:
    def test_broken_truncation_fails(self):
        config = RunConfig(
            model=ModelSection(U=0.1), truncation=TruncationSection(keep=10, dim_work=12)
        )
        assert not check_truncation_convergence(config).passed

    def test_default_truncation_converges(self):
        assert check_truncation_convergence(RunConfig()).passed

    def test_g2_bounded(self):
        assert check_g2_bounded(quick=True).passed

    def test_attractive_statistics(self):
        assert all(result.passed for result in check_attractive_statistics())

    def test_weak_quartic_map_extremes(self):
        results = check_weak_quartic_map(RunConfig(), 60)
        assert all(result.required for result in results)
        assert all(result.passed for result in results), [r.detail for r in results]


class TestValidateCommand:
    def test_quick_run(self, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text("[validate]\nquick = true\n")

        result = runner.invoke(app, ["validate", "--config", str(config), "--out", str(tmp_path)])

        assert result.exit_code == 0, result.output
        checks = json.loads((tmp_path / "validation.json").read_text())["data"]["checks"]
        names = {c["name"] for c in checks}
        assert {"truncation-convergence", "repulsive-g2-bounded", "weak-quartic-map-max"} <= names
        assert all(c["passed"] for c in checks if c["required"])
        assert not any(c["required"] for c in checks if c["name"].startswith("weak-quartic-map"))

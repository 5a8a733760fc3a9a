"""Tests for CLI entry point module.

Commands run on the quick preset so that each invocation trains in seconds.
"""

from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from dsrkit import __version__
from dsrkit.classifier import forward
from dsrkit.cli import EXIT_CONFIG, EXIT_RUNTIME, cli
from dsrkit.harness.config import load_config
from dsrkit.harness.experiments import prepare_session

QUICK = ["--preset", "quick"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """Directory holding generated data and a trained checkpoint."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    generated = runner.invoke(cli, ["gen-data", *QUICK, "--out", str(root / "data")])
    assert generated.exit_code == 0, generated.output
    trained = runner.invoke(
        cli, ["train", *QUICK, "--data", str(root / "data"), "--out", str(root / "model")]
    )
    assert trained.exit_code == 0, trained.output
    return root


class TestCLIGroup:
    """Test the main CLI group and global options."""

    def test_cli_help(self) -> None:
        """Test that --help lists the commands."""
        runner = CliRunner()
        result = runner.invoke(cli, ["--help"])

        assert result.exit_code == 0
        for command in ("gen-data", "train", "attack-table", "dsr-sweep", "suite", "bound-check"):
            assert command in result.output
        assert "--verbose" in result.output

    def test_cli_version(self) -> None:
        """Test that --version displays the version number."""
        runner = CliRunner()
        result = runner.invoke(cli, ["--version"])

        assert result.exit_code == 0
        assert __version__ in result.output
        assert "dsrkit" in result.output

    def test_command_help(self) -> None:
        """Test that command help shows the shared options."""
        runner = CliRunner()
        result = runner.invoke(cli, ["attack-table", "--help"])

        assert result.exit_code == 0
        for option in ("--config", "--seed", "--out", "--preset", "--data", "--model"):
            assert option in result.output


class TestDataAndTraining:
    """Test gen-data and train."""

    def test_files_written(self, workspace: Path) -> None:
        """Test that the data splits and checkpoint exist."""
        assert (workspace / "data" / "train.dsrdata").exists()
        assert (workspace / "data" / "test.dsrdata").exists()
        assert (workspace / "model" / "model.ckpt").exists()

    def test_gen_data_deterministic(self, workspace: Path, tmp_path: Path) -> None:
        """Test that regenerating with the same seed gives identical files."""
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", *QUICK, "--out", str(tmp_path)])

        assert result.exit_code == 0
        assert "128 train and 32 test" in result.output
        assert (tmp_path / "test.dsrdata").read_bytes() == (
            workspace / "data" / "test.dsrdata"
        ).read_bytes()


class TestExperimentCommands:
    """Test the experiment commands against stored data and model."""

    def _stored(self, workspace: Path) -> list[str]:
        return [
            *QUICK,
            "--data",
            str(workspace / "data"),
            "--model",
            str(workspace / "model" / "model.ckpt"),
        ]

    @pytest.mark.parametrize(
        ("command", "filename", "header"),
        [
            ("attack-table", "attack_table.csv", "label,accuracy,psnr,count"),
            ("dsr-sweep", "dsr_sweep.csv", "quality,metric,mean,std"),
            ("order-exp", "order_experiment.csv", "label,accuracy,psnr,count"),
            ("radius-study", "radius_study.csv", "quality,mean_radius,std_radius,mean_margin"),
        ],
    )
    def test_writes_csv(
        self, workspace: Path, tmp_path: Path, command: str, filename: str, header: str
    ) -> None:
        """Test that each command writes its CSV with the expected header."""
        runner = CliRunner()
        result = runner.invoke(cli, [command, *self._stored(workspace), "--out", str(tmp_path)])

        assert result.exit_code == 0, result.output
        assert (tmp_path / filename).read_text().splitlines()[0] == header

    def test_eps_ablation_custom_budgets(self, workspace: Path, tmp_path: Path) -> None:
        """Test that repeated --eps values become the columns."""
        runner = CliRunner()
        args = ["eps-ablation", *self._stored(workspace), "--out", str(tmp_path)]
        result = runner.invoke(cli, [*args, "--eps", "0", "--eps", "0.1"])

        assert result.exit_code == 0, result.output
        lines = (tmp_path / "eps_ablation.csv").read_text().splitlines()
        assert lines[0] == "label,eps=0,eps=0.1"
        assert len(lines) == 9

    def test_plane(self, workspace: Path, tmp_path: Path) -> None:
        """Test the heatmap files of a compressed plane."""
        runner = CliRunner()
        args = ["plane", *self._stored(workspace), "--out", str(tmp_path), "--quality", "10"]
        result = runner.invoke(cli, args)

        assert result.exit_code == 0, result.output
        ppm = (tmp_path / "plane_q10.ppm").read_bytes()
        assert ppm.startswith(b"P6\n9 9\n255\n")
        assert (tmp_path / "plane_q10.csv").read_text().startswith("min,max\n")

    @pytest.mark.parametrize("quality", ["0", "abc"])
    def test_plane_bad_quality(self, workspace: Path, tmp_path: Path, quality: str) -> None:
        """Test that an invalid quality is a configuration error."""
        runner = CliRunner()
        args = ["plane", *self._stored(workspace), "--out", str(tmp_path), "--quality", quality]
        result = runner.invoke(cli, args)

        assert result.exit_code == EXIT_CONFIG

    def test_plane_index_out_of_range(self, workspace: Path, tmp_path: Path) -> None:
        """Test that an index past the test split is a runtime error."""
        runner = CliRunner()
        args = ["plane", *self._stored(workspace), "--out", str(tmp_path), "--index", "500"]
        result = runner.invoke(cli, args)

        assert result.exit_code == EXIT_RUNTIME


class TestBoundCheck:
    """Test the bound-check command."""

    def test_linear_pca_is_certified(self, tmp_path: Path) -> None:
        """Test a certified report for a linear model with PCA."""
        config = load_config(preset="quick", overrides={"model.hidden": []})
        session = prepare_session(config)
        operator = session.factory.build("pca", components=16)
        model = session.require_model()
        test = session.test_split
        index = next(
            i
            for i in range(len(test))
            if int(np.argmax(forward(model, operator(test.images[i])))) == int(test.labels[i])
        )

        runner = CliRunner()
        args = ["bound-check", *QUICK, "--linear", "--operator", "pca", "--components", "16"]
        result = runner.invoke(cli, [*args, "--index", str(index), "--probes", "4"])

        assert result.exit_code == 0, result.output
        assert "pca(k=16)" in result.output
        assert "yes" in result.output.split("certified:")[1].splitlines()[0]
        assert "yes" in result.output.split("holds:")[1].splitlines()[0]


class TestErrors:
    """Test exit codes for bad input."""

    def test_unknown_config_key(self, tmp_path: Path) -> None:
        """Test that an unknown key exits with the configuration code."""
        path = tmp_path / "run.cfg"
        path.write_text("attack.pgd.itres = 3\n")
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", *QUICK, "--config", str(path)])

        assert result.exit_code == EXIT_CONFIG
        assert "unknown configuration key" in result.output

    def test_unknown_preset(self, tmp_path: Path) -> None:
        """Test that an unknown preset exits with the configuration code."""
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", "--preset", "huge", "--out", str(tmp_path)])

        assert result.exit_code == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path: Path) -> None:
        """Test that click rejects a missing config path as a usage error."""
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", "--config", str(tmp_path / "absent.cfg")])

        assert result.exit_code == 2

    @pytest.mark.parametrize(
        ("line", "key"),
        [
            ("model.hidden = a, b", "model.hidden"),
            ("ablation.epsilons = big", "ablation.epsilons"),
        ],
    )
    def test_non_numeric_list_entries(self, tmp_path: Path, line: str, key: str) -> None:
        """Test that list entries of the wrong type exit with the configuration code."""
        path = tmp_path / "run.cfg"
        path.write_text(line + "\n")
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", *QUICK, "--config", str(path)])

        assert result.exit_code == EXIT_CONFIG
        assert key in result.output

    def test_config_file_not_utf8(self, tmp_path: Path) -> None:
        """Test that undecodable config bytes exit with the configuration code."""
        path = tmp_path / "run.cfg"
        path.write_bytes(b"seed = \xff\xfe\n")
        runner = CliRunner()
        result = runner.invoke(cli, ["gen-data", *QUICK, "--config", str(path)])

        assert result.exit_code == EXIT_CONFIG
        assert "UTF-8" in result.output

    def test_corrupt_checkpoint(self, workspace: Path, tmp_path: Path) -> None:
        """Test that a garbage checkpoint exits with the runtime code."""
        bad = tmp_path / "bad.ckpt"
        bad.write_bytes(b"not a checkpoint")
        runner = CliRunner()
        args = ["attack-table", *QUICK, "--data", str(workspace / "data"), "--model", str(bad)]
        result = runner.invoke(cli, [*args, "--out", str(tmp_path)])

        assert result.exit_code == EXIT_RUNTIME
        assert "bad magic" in result.output

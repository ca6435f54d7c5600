"""Command-line interface: outputs, overrides, and exit codes."""

from __future__ import annotations

import subprocess

import numpy as np
import pytest

from coded_incentives import read_matrix
from coded_incentives.cli import build_parser, main


SMALL_HETERO = (
    "1.0 50.0 0.012 8\n"
    "3.0 10.0 0.031 6\n"
    "9.0 40.0 0.123 5\n"
    "gamma_time = 200\n"
    "total_rows = 60\n"
)

SMALL_COST_ONLY = (
    "1.0 2.0 1.0 6\n"
    "4.0 2.0 1.0 4\n"
    "gamma_time = 20\n"
    "total_rows = 56\n"
)


@pytest.fixture()
def hetero_cfg(tmp_path):
    path = tmp_path / "hetero.cfg"
    path.write_text(SMALL_HETERO)
    return str(path)


@pytest.fixture()
def cost_only_cfg(tmp_path):
    path = tmp_path / "cost.cfg"
    path.write_text(SMALL_COST_ONLY)
    return str(path)


class TestParser:
    def test_requires_subcommand(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])
        capsys.readouterr()

    def test_rejects_unknown_experiment(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["experiment", "fig9"])
        capsys.readouterr()


class TestSolve:
    def test_incomplete_default(self, capsys):
        assert main(["solve"]) == 0
        out = capsys.readouterr().out
        assert "scenario: incomplete-hetero" in out
        assert "targeted types: 1, 2, 3" in out

    def test_complete_scenario(self, capsys):
        assert main(["solve", "--scenario", "complete"]) == 0
        out = capsys.readouterr().out
        assert "scenario: complete-hetero" in out

    def test_cost_only_with_shared_runtime(self, cost_only_cfg, capsys):
        assert main(["solve", "--scenario", "cost-only", "--config", cost_only_cfg]) == 0
        out = capsys.readouterr().out
        assert "scenario: incomplete-cost-only" in out
        assert "recovery threshold:" in out

    def test_cost_only_rejects_mixed_runtime(self, capsys):
        assert main(["solve", "--scenario", "cost-only"]) == 2
        err = capsys.readouterr().err
        assert "configuration error" in err

    def test_missing_config_exits_2(self, capsys):
        assert main(["solve", "--config", "/nonexistent.cfg"]) == 2
        capsys.readouterr()

    def test_unknown_setting_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("bogus = 1\n")
        assert main(["solve", "--config", str(path)]) == 2
        assert "unknown setting" in capsys.readouterr().err

    def test_empty_population_exits_4(self, tmp_path, capsys):
        path = tmp_path / "zero.cfg"
        path.write_text("1.0 50.0 0.012 0\n")
        assert main(["solve", "--config", str(path)]) == 4
        assert "infeasible" in capsys.readouterr().err

    def test_out_file(self, hetero_cfg, tmp_path, capsys):
        out_path = tmp_path / "offer.txt"
        assert main(["solve", "--config", hetero_cfg, "--out", str(out_path)]) == 0
        assert capsys.readouterr().out == ""
        text = out_path.read_text()
        assert text.endswith("\n")
        assert "targeted types" in text


class TestVerify:
    def test_reports_compliance(self, hetero_cfg, capsys):
        assert main(["verify", "--config", hetero_cfg]) == 0
        out = capsys.readouterr().out
        assert "individually rational and incentive compatible" in out
        assert "kind,true_type,reported_type,value" in out

    def test_complete_scenario(self, hetero_cfg, capsys):
        assert main(["verify", "--scenario", "complete", "--config", hetero_cfg]) == 0
        capsys.readouterr()


class TestSimulate:
    def test_single_round(self, hetero_cfg, capsys):
        assert main(["simulate", "--config", hetero_cfg, "--seed", "3"]) == 0
        out = capsys.readouterr().out
        assert "round 0:" in out
        assert "mean realized cost over 1 round(s)" in out
        assert "announced expected cost" in out

    def test_reps_override(self, hetero_cfg, capsys):
        assert main(["simulate", "--config", hetero_cfg, "--reps", "3"]) == 0
        out = capsys.readouterr().out
        assert "round 2:" in out
        assert "over 3 round(s)" in out

    def test_seed_changes_outcome(self, hetero_cfg, capsys):
        main(["simulate", "--config", hetero_cfg, "--seed", "1"])
        first = capsys.readouterr().out
        main(["simulate", "--config", hetero_cfg, "--seed", "1"])
        repeat = capsys.readouterr().out
        main(["simulate", "--config", hetero_cfg, "--seed", "2"])
        other = capsys.readouterr().out
        assert first == repeat
        assert first != other

    def test_cost_only_round(self, cost_only_cfg, capsys):
        assert main(
            ["simulate", "--scenario", "cost-only", "--config", cost_only_cfg]
        ) == 0
        out = capsys.readouterr().out
        assert "round 0:" in out

    def test_matrix_and_vector_files(self, hetero_cfg, tmp_path, capsys):
        rng = np.random.default_rng(0)
        matrix = rng.standard_normal((60, 2))
        m_path = tmp_path / "m.txt"
        m_path.write_text(
            "60 2\n"
            + "\n".join(f"{float(a)!r} {float(b)!r}" for a, b in matrix)
            + "\n"
        )
        v_path = tmp_path / "v.txt"
        v_path.write_text("2\n0.5 -1.25\n")
        assert (
            main(
                [
                    "simulate",
                    "--config",
                    hetero_cfg,
                    "--matrix",
                    str(m_path),
                    "--vector",
                    str(v_path),
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "decode error" in out
        assert np.allclose(read_matrix(str(m_path)), matrix)

    def test_matrix_row_mismatch_exits_2(self, hetero_cfg, tmp_path, capsys):
        m_path = tmp_path / "m.txt"
        m_path.write_text("2 2\n1 2\n3 4\n")
        assert (
            main(["simulate", "--config", hetero_cfg, "--matrix", str(m_path)])
            == 2
        )
        assert "matrix has 2 rows" in capsys.readouterr().err

    def test_vector_length_mismatch_exits_2(self, hetero_cfg, tmp_path, capsys):
        v_path = tmp_path / "v.txt"
        v_path.write_text("3\n1 2 3\n")
        assert (
            main(["simulate", "--config", hetero_cfg, "--vector", str(v_path)])
            == 2
        )
        assert "vector length" in capsys.readouterr().err

    def test_fractional_rows_exits_2(self, tmp_path, capsys):
        path = tmp_path / "frac.cfg"
        path.write_text(SMALL_HETERO.replace("total_rows = 60", "total_rows = 60.5"))
        assert main(["simulate", "--config", str(path)]) == 2
        assert "integer total row count" in capsys.readouterr().err

    def test_zero_reps_exits_2(self, hetero_cfg, capsys):
        assert main(["simulate", "--config", hetero_cfg, "--reps", "0"]) == 2
        capsys.readouterr()

    def test_ill_conditioned_code_exits_3(self, tmp_path, capsys):
        # Forty shared-runtime workers push the polynomial code matrix
        # past the conditioning guard.
        path = tmp_path / "big.cfg"
        path.write_text(
            "1.0 2.0 1.0 40\n"
            "gamma_time = 20\n"
            "total_rows = 120\n"
        )
        assert (
            main(["simulate", "--scenario", "cost-only", "--config", str(path)])
            == 3
        )
        assert "numerical failure" in capsys.readouterr().err


class TestEncodeDemo:
    def test_walkthrough(self, capsys):
        assert main(["encode-demo"]) == 0
        out = capsys.readouterr().out
        assert "any 2 suffice" in out
        assert "agreement: True" in out


class TestExperiment:
    def test_fig4_csv(self, hetero_cfg, tmp_path, capsys):
        out_path = tmp_path / "fig4.csv"
        assert (
            main(
                [
                    "experiment",
                    "fig4",
                    "--config",
                    hetero_cfg,
                    "--out",
                    str(out_path),
                ]
            )
            == 0
        )
        capsys.readouterr()
        lines = out_path.read_text().strip().split("\n")
        assert lines[0] == "# name = fig4"
        header_index = next(
            i for i, line in enumerate(lines) if not line.startswith("#")
        )
        assert lines[header_index] == "N,targeted_complete,targeted_incomplete"

    def test_custom_stdout(self, tmp_path, capsys):
        path = tmp_path / "sweep.cfg"
        path.write_text(SMALL_HETERO + "sweep = 100,200\n")
        assert main(["experiment", "custom", "--config", str(path)]) == 0
        out = capsys.readouterr().out
        assert "N,targeted_complete,targeted_incomplete," in out
        assert out.endswith("\n")

    def test_seed_and_reps_override_metadata(self, tmp_path, capsys):
        path = tmp_path / "sweep.cfg"
        path.write_text(SMALL_HETERO + "sweep = 50,100\nreplications = 2\n")
        assert (
            main(
                [
                    "experiment",
                    "fig7",
                    "--config",
                    str(path),
                    "--seed",
                    "42",
                    "--reps",
                    "3",
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "# seed = 42" in out
        assert "# replications = 3" in out


class TestConsoleScript:
    def test_installed_entry_point(self):
        result = subprocess.run(
            ["coded-incentives", "encode-demo"],
            capture_output=True,
            text=True,
            timeout=120,
        )
        assert result.returncode == 0
        assert "agreement: True" in result.stdout

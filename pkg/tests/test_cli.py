"""End-to-end CLI tests (exit codes, files, determinism)."""

import json
import subprocess
import sys

import pytest

from copolicy.cli import main

CONFIG = """
[panel]
n_units = 16
n_years = 10
seed = 3

[grid]
effects = [[-0.10, -0.10]]
gaps = ["C1", "C2"]
n_treated = [5]
models = [["AR", "correct"], ["AR", "misspecified"]]

[run]
n_reps = 6
master_seed = 11
workers = 1
"""


def write_config(tmp_path, text=CONFIG):
    path = tmp_path / "cfg.toml"
    path.write_text(text)
    return path


class TestRun:
    def test_run_writes_results_and_manifest(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        code = main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
        assert code == 0
        assert (out / "results.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["master_seed"] == 11
        assert manifest["config"]["run"]["n_reps"] == 6
        header = (out / "results.csv").read_text().splitlines()[0]
        assert header.startswith("scenario_id,effect1,effect2,gap,k,phase_in,ordering,model,spec,policy")

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg), "--out", str(a), "--quiet"]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(b), "--quiet"]) == 0
        assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()

    def test_flag_overrides_win(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out),
                     "--reps", "4", "--seed", "99", "--quiet"]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["master_seed"] == 99
        assert manifest["config"]["run"]["n_reps"] == 4

    def test_unknown_key_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, CONFIG + "\n[run2]\nx = 1\n")
        assert main(["run", "--config", str(cfg), "--quiet"]) == 2
        assert "run2" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.toml"), "--quiet"]) == 2

    def test_infeasible_scenario_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, CONFIG.replace('gaps = ["C1", "C2"]', 'gaps = ["C4"]'))
        assert main(["run", "--config", str(cfg), "--quiet"]) == 2

    def test_keep_reps_writes_replications(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--keep-reps", "--quiet"]) == 0
        lines = (out / "replications.csv").read_text().splitlines()
        # 2 cells x (2 policies + 1 policy) x 6 reps
        assert len(lines) == 1 + 2 * 3 * 6


class TestSynthValidate:
    def test_synth_then_validate(self, tmp_path, capsys):
        panel_csv = tmp_path / "panel.csv"
        assert main(["synth", "--out", str(panel_csv), "--units", "50", "--years", "18"]) == 0
        assert main(["validate", str(panel_csv)]) == 0
        out = capsys.readouterr().out
        assert "balanced: 50 units x 18 years" in out

    def test_validate_unbalanced_nonzero(self, tmp_path, capsys):
        panel_csv = tmp_path / "panel.csv"
        main(["synth", "--out", str(panel_csv), "--units", "4", "--years", "5"])
        lines = panel_csv.read_text().splitlines()
        panel_csv.write_text("\n".join(lines[:-1]) + "\n")  # drop last cell
        assert main(["validate", str(panel_csv)]) == 1
        assert "missing" in capsys.readouterr().err

    def test_validate_empty_exit_2(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        assert main(["validate", str(empty)]) == 2


class TestFigures:
    @pytest.fixture()
    def results_dir(self, tmp_path):
        cfg = write_config(tmp_path, """
[panel]
n_units = 16
n_years = 18
seed = 3

[grid]
effects = [[-0.10, -0.10]]
gaps = ["C1", "C2", "C3", "C4"]
n_treated = [30]
models = [["AR", "correct"]]

[run]
n_reps = 4
master_seed = 11
workers = 1
""".replace("n_treated = [30]", "n_treated = [8]"))
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        # figure filters expect k=30; patch the column for the fixture
        import pandas as pd
        df = pd.read_csv(out / "results.csv")
        df["k"] = 30
        df.to_csv(out / "results.csv", index=False)
        return out

    def test_figure1_emits_six_csvs(self, results_dir, tmp_path):
        dest = tmp_path / "figs"
        assert main(["figures", str(results_dir / "results.csv"), "--figure", "1",
                     "--out", str(dest)]) == 0
        assert len(list(dest.glob("figure1_*.csv"))) == 6

    def test_unknown_figure_exit_2(self, results_dir):
        assert main(["figures", str(results_dir / "results.csv"), "--figure", "9"]) == 2

    def test_missing_cells_exit_1(self, results_dir):
        import pandas as pd
        df = pd.read_csv(results_dir / "results.csv")
        df[df["gap"] != "C2"].to_csv(results_dir / "partial.csv", index=False)
        assert main(["figures", str(results_dir / "partial.csv"), "--figure", "1"]) == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "copolicy.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "copolicy" in proc.stdout

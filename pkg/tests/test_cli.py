import os
import subprocess
import sys

import pytest

from wienerlab.cli import (EXIT_CONTRADICTION, EXIT_INCONCLUSIVE, EXIT_OK, EXIT_USAGE,
                           _parse_direction, _parse_poly, main)


def run(args, tmp_path, extra_env=None):
    env_out = str(tmp_path)
    old = os.environ.get("WIENERLAB_OUT")
    os.environ["WIENERLAB_OUT"] = env_out
    try:
        return main(args)
    finally:
        if old is None:
            os.environ.pop("WIENERLAB_OUT", None)
        else:
            os.environ["WIENERLAB_OUT"] = old


class TestPolyParsing:
    def test_simple_square(self):
        p = _parse_poly("x1^2")
        assert p.terms == {(2,): 1.0}

    def test_mixed_terms(self):
        p = _parse_poly("2*x1^2*x2 - 0.5*x1 + 3")
        assert p.terms == {(2, 1): 2.0, (1, 0): -0.5, (0, 0): 3.0}

    def test_garbage_rejected(self):
        with pytest.raises(Exception):
            _parse_poly("x1^^2 @")

    def test_direction(self):
        d = _parse_direction("1.0,-2.0")
        assert list(d.density_values) == [1.0, -2.0]
        assert d.grid.n_cells == 2


class TestExitCodes:
    def test_thm31_default(self, tmp_path):
        assert run(["reproduce-thm31", "--out", str(tmp_path)], tmp_path) == EXIT_OK
        assert (tmp_path / "thm31-report.csv").exists()
        assert (tmp_path / "thm31-report.md").exists()

    def test_thm31_bad_exponent(self, tmp_path):
        assert run(["reproduce-thm31", "--a", "1.0"], tmp_path) == EXIT_USAGE

    def test_thm31_other_valid_exponent(self, tmp_path):
        assert run(["reproduce-thm31", "--a", "3.0", "--out", str(tmp_path)],
                   tmp_path) == EXIT_OK

    def test_thm33_default(self, tmp_path):
        assert run(["reproduce-thm33", "--out", str(tmp_path)], tmp_path) == EXIT_OK

    def test_thm33_bad_window(self, tmp_path, capsys):
        assert run(["reproduce-thm33", "--eta", "0.1", "--mu", "0.2"],
                   tmp_path) == EXIT_USAGE
        err = capsys.readouterr().err
        assert "weight_decreasing" in err

    def test_diagnose_linear(self, tmp_path):
        assert run(["diagnose", "--functional", "linear", "--delta", "0.1",
                    "--h", "1.0", "--out", str(tmp_path)], tmp_path) == EXIT_OK

    def test_diagnose_unknown(self, tmp_path):
        assert run(["diagnose", "--functional", "mystery"], tmp_path) == EXIT_USAGE

    def test_diagnose_requires_name(self, tmp_path):
        assert run(["diagnose"], tmp_path) == EXIT_USAGE

    def test_unknown_flag(self, tmp_path):
        assert run(["reproduce-thm31", "--frobnicate"], tmp_path) == EXIT_USAGE

    def test_cm_check(self, tmp_path):
        code = run(["cm-check", "--poly", "x1^2", "--direction", "1.0",
                    "--n-samples", "100000", "--out", str(tmp_path)], tmp_path)
        assert code == EXIT_OK
        assert (tmp_path / "cm-check.csv").exists()

    def test_cm_check_missing_directions(self, tmp_path):
        assert run(["cm-check", "--poly", "x1*x2", "--direction", "1.0"],
                   tmp_path) == EXIT_USAGE


class TestConfigPrecedence:
    def test_config_file_supplies_values(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 1.0\n", encoding="utf-8")
        assert run(["reproduce-thm31", "--config", str(cfg)], tmp_path) == EXIT_USAGE

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("a = 1.0\nout = " + str(tmp_path) + "\n", encoding="utf-8")
        code = run(["reproduce-thm31", "--config", str(cfg), "--a", "2.0"], tmp_path)
        assert code == EXIT_OK

    def test_env_var_sets_output_dir(self, tmp_path):
        code = run(["diagnose", "--functional", "linear", "--delta", "0.1",
                    "--h", "1.0", "--format", "csv"], tmp_path)
        assert code == EXIT_OK
        assert (tmp_path / "linear-diagnose.csv").exists()

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("this is not a pair\n", encoding="utf-8")
        assert run(["reproduce-thm31", "--config", str(cfg)], tmp_path) == EXIT_USAGE


class TestDeterminism:
    def test_same_seed_same_csv_bytes(self, tmp_path):
        d1, d2 = tmp_path / "one", tmp_path / "two"
        for d in (d1, d2):
            code = run(["diagnose", "--functional", "thm31", "--delta", "0.1",
                        "--h", "1.0", "--seed", "7", "--format", "csv",
                        "--out", str(d)], tmp_path)
            assert code == EXIT_OK
        b1 = (d1 / "thm31-diagnose.csv").read_bytes()
        b2 = (d2 / "thm31-diagnose.csv").read_bytes()
        assert b1 == b2

    def test_cm_check_same_seed_same_bytes(self, tmp_path):
        d1, d2 = tmp_path / "a", tmp_path / "b"
        for d in (d1, d2):
            assert run(["cm-check", "--n-samples", "20000", "--seed", "11",
                        "--format", "csv", "--out", str(d)], tmp_path) == EXIT_OK
        assert (d1 / "cm-check.csv").read_bytes() == (d2 / "cm-check.csv").read_bytes()


def test_console_entrypoint_runs(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "wienerlab.cli", "cm-check", "--n-samples", "10000",
         "--out", str(tmp_path), "--format", "csv"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "within 3 SE" in proc.stdout

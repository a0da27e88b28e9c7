import subprocess
import sys

import pytest

from riclab.cli import main


def _run(*args):
    return subprocess.run([sys.executable, "-m", "riclab", *args], capture_output=True, text=True)


def test_quicksort_run(tmp_path):
    assert main(["quicksort", "--n", "64", "--trials", "10", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "quicksort_summary.csv").exists()
    assert (tmp_path / "quicksort_trials.csv").read_text().count("\n") == 11


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("algorithm=darts\nn=100\ntrials=5\n")
    assert main(["darts", "--config", str(cfg), "--trials", "7", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "darts_trials.csv").read_text().count("\n") == 8
    assert "trials=7" in (tmp_path / "darts_config.txt").read_text()


def test_config_algorithm_mismatch(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("algorithm=darts\n")
    assert main(["quicksort", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    assert capsys.readouterr().err.startswith("error: ValueError:")


def test_errors_are_one_line_and_nonzero(tmp_path):
    r = _run("trapmap", "--n", "0", "--out", str(tmp_path))
    assert r.returncode == 1
    assert r.stderr.strip().splitlines() == ["error: ConfigError: n=0 outside 1..65536 for trapmap"]
    r = _run("trapmap", "--generator", "file", "--input", str(tmp_path / "missing.txt"), "--out", str(tmp_path))
    assert r.returncode == 1 and r.stderr.startswith("error: FileNotFoundError:")
    assert r.stdout == ""


def test_argparse_rejects_bad_mode(tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["trapmap", "--mode", "fast"])
    assert e.value.code == 2


def test_grid_flag_selects_grid(tmp_path):
    assert main(["trapmap", "--grid", "4", "--n", "8", "--trials", "3", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "trapmap_summary.csv").read_text()
    assert ",16,conflict-graph," in text


def test_bound_custom_and_default(tmp_path):
    assert main(["bound", "--n", "1024", "--out", str(tmp_path)]) == 0
    assert "freedman" in (tmp_path / "bound.csv").read_text()
    assert main(["bound", "--lam", "2", "--delta-sq", "1", "--m-max", "1", "--sq-sum", "4", "--msw-a", "1",
                 "--msw-b", "3", "--out", str(tmp_path)]) == 0
    line = (tmp_path / "bound.csv").read_text().splitlines()[1].split(",")
    assert float(line[5]) == pytest.approx(0.6023884238244043)
    assert float(line[7]) == pytest.approx(0.3138365)
    assert main(["bound", "--lam", "2", "--out", str(tmp_path)]) == 1


def test_adversary_flags(tmp_path):
    assert main(["adversary", "--sizes", "64,128", "--trials-scale", "20", "--c-over-log", "0.025",
                 "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "adversary_summary.csv").read_text().splitlines()
    assert len(rows) == 3

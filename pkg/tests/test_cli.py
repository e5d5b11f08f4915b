import json
import os

import pytest

from dmnls.cli import (
    EXIT_CERTIFICATION,
    EXIT_CONFIG,
    EXIT_OK,
    main,
)

GOOD = """
grid.n = 512
grid.length = 64
initial.epsilon = 0.2
time.dt = 0.05
time.t_end = 2
"""


@pytest.fixture
def good_cfg(tmp_path):
    path = tmp_path / "good.cfg"
    path.write_text(GOOD)
    return path


def test_run_missing_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.cfg")]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_bad_key(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid.sides = 3\n")
    assert main(["run", str(bad)]) == EXIT_CONFIG


def test_run_writes_run_dir(good_cfg, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(good_cfg), "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "completed"
    assert all(manifest["certification"].values())
    assert (out / "observables.csv").is_file()


def test_out_root_env_var(good_cfg, tmp_path, monkeypatch):
    monkeypatch.setenv("DMNLS_OUT", str(tmp_path / "envroot"))
    monkeypatch.chdir(tmp_path)
    assert main(["run", str(good_cfg)]) == EXIT_OK
    roots = list((tmp_path / "envroot").iterdir())
    assert len(roots) == 1 and (roots[0] / "manifest.json").is_file()


def test_verify_fast_exit_code(capsys):
    assert main(["verify", "--level", "fast"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_scatter_rejects_non_run_dir(tmp_path, capsys):
    assert main(["scatter", str(tmp_path)]) == EXIT_CONFIG


def test_scatter_rejects_short_run(good_cfg, tmp_path, capsys):
    out = tmp_path / "short"
    assert main(["run", str(good_cfg), "--out", str(out)]) == EXIT_OK
    # T_final = 2 < 50: scattering extraction must refuse
    assert main(["scatter", str(out)]) == EXIT_CERTIFICATION
    assert "scatter failed" in capsys.readouterr().err


def test_sweep_isolates_cell_failures(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(GOOD + "dispersion.d_av = 0,1\n")
    out = tmp_path / "sweepout"
    assert main(["sweep", str(cfg), "--out", str(out)]) == EXIT_OK
    rows = (out / "sweep.csv").read_text().strip().splitlines()
    assert rows[0].startswith("eps,d_plus,d_minus,t_plus")
    assert len(rows) == 3
    statuses = {line.split(",")[-1] for line in rows[1:]}
    # the d_av = 0 cell fails alone; the valid cell still runs (its scatter
    # refuses at T_final = 2, recorded per cell, sweep itself succeeds)
    assert "config_error" in statuses
    assert len(statuses) == 2

import json

import numpy as np
import pytest
from click.testing import CliRunner

from rydgate.cli import main
from rydgate.model import ControlGrid


@pytest.fixture
def run():
    runner = CliRunner()

    def _run(*args):
        return runner.invoke(main, [str(a) for a in args], catch_exceptions=False)

    return _run


def test_spectrum_json(run):
    r = run("spectrum", "--B", 1, "--omega-c", 1, "--omega-t", 1)
    assert r.exit_code == 0
    data = json.loads(r.output)
    assert data["eps_plus"] == pytest.approx(1.3065629648763766)
    assert len(data["eigenvalues"]) == 5


def test_pulse_and_sidecar(run, tmp_path):
    out = tmp_path / "pulse.json"
    r = run("pulse", "pi2pipi", "--out", out)
    assert r.exit_code == 0
    g = ControlGrid.load(out)
    assert g.N % 4 == 0 and np.all(g.omega_C * g.omega_T == 0)
    meta = json.loads((tmp_path / "pulse.json.meta.json").read_text())
    assert meta["command"] == "pulse pi2pipi" and "timestamp" in meta


def test_pulse_bad_bins(run, tmp_path):
    r = run("pulse", "pi2pipi", "--bins", 730, "--out", tmp_path / "p.json")
    assert r.exit_code != 0


def test_scan_is_reproducible(run, tmp_path):
    args = ["scan", "--mechanism", "ideal", "--tmin", 1.2, "--tmax", 1.3, "--step", 0.05,
            "--bins", 40, "--seeds", 1]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(*args, "--out", a).exit_code == 0
    assert run(*args, "--out", b).exit_code == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "T_units,T_us,epsilon"


def test_optimize_writes_grid(run, tmp_path):
    out = tmp_path / "g.json"
    r = run("optimize", "--mechanism", "blockade", "--R", 2.0, "--T", 0.13, "--bins", 30,
            "--seeds", 1, "--out", out)
    assert r.exit_code == 0
    assert ControlGrid.load(out).N == 30


def test_missing_R(run, tmp_path):
    r = CliRunner().invoke(main, ["optimize", "--mechanism", "blockade", "--T", "0.1",
                                  "--out", str(tmp_path / "x.json")])
    assert r.exit_code != 0


def test_unknown_figure_exit_code(tmp_path):
    r = CliRunner().invoke(main, ["reproduce", "fig1", "--outdir", str(tmp_path)])
    assert r.exit_code == 2
    assert "unknown figure" in r.output


def test_unwritable_output():
    r = CliRunner().invoke(main, ["pulse", "pi2pipi", "--out", "/nonexistent/dir/p.json"])
    assert r.exit_code != 0

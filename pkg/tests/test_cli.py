import csv

from click.testing import CliRunner

import skfeeg.experiment as experiment
from skfeeg.cli import main
from skfeeg.errors import NumericalFailure

SMALL = """\
geometry:
  electrode_count: 16
  node_spacing: 0.026
sweep:
  ep_snr_db: [20]
  pm_snr_db: [0]
  noise_db: [30]
  alpha: [1.0, 1.25]
  smoothing: [true]
repetitions: 2
"""


def _cfg(tmp_path):
    p = tmp_path / "small.yaml"
    p.write_text(SMALL)
    return str(p)


def test_sweep_and_plot(tmp_path):
    r = CliRunner().invoke(main, ["sweep", "--config", _cfg(tmp_path), "--out", str(tmp_path / "o")])
    assert r.exit_code == 0, r.output
    assert (tmp_path / "o" / "results.csv").exists()
    assert (tmp_path / "o" / "plots" / "alpha_panel_noise30_ep20_pm0_smooth.svg").exists()
    r = CliRunner().invoke(main, ["plot", "--results", str(tmp_path / "o"), "--out", str(tmp_path / "p")])
    assert r.exit_code == 0, r.output
    assert any((tmp_path / "p").glob("panel_*.svg"))


def test_seed_from_environment(tmp_path):
    r = CliRunner().invoke(main, ["sweep", "--config", _cfg(tmp_path), "--out", str(tmp_path / "o"),
                                  "--no-plots"], env={"SKFEEG_SEED": "99"})
    assert r.exit_code == 0, r.output
    with open(tmp_path / "o" / "results.csv", newline="") as fh:
        assert {row["base_seed"] for row in csv.DictReader(fh)} == {"99"}


def test_sweep_failure_exit_code(tmp_path, monkeypatch):
    def fail(*a, **k):
        raise NumericalFailure("boom", step=0)
    monkeypatch.setattr(experiment, "run_filter", fail)
    r = CliRunner().invoke(main, ["sweep", "--config", _cfg(tmp_path), "--out", str(tmp_path / "o"),
                                  "--no-plots"])
    assert r.exit_code == 1
    assert "4 failed" in r.output


def test_bad_config_message(tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("sweep:\n  noise_db: []\n")
    r = CliRunner().invoke(main, ["sweep", "--config", str(p)])
    assert r.exit_code != 0
    assert "noise_db" in r.output


def test_simulate_and_filter(tmp_path):
    cfg = _cfg(tmp_path)
    r = CliRunner().invoke(main, ["simulate", "--config", cfg, "--out", str(tmp_path / "s"),
                                  "--leadfield"])
    assert r.exit_code == 0, r.output
    for name in ("waveforms.csv", "clean.csv", "noisy.csv", "leadfield.csv"):
        assert (tmp_path / "s" / name).exists()
    r = CliRunner().invoke(main, ["filter", "--config", cfg, "--out", str(tmp_path / "f")])
    assert r.exit_code == 0, r.output
    assert "smoothed:" in r.output
    with open(tmp_path / "f" / "amplitudes.csv", newline="") as fh:
        kinds = {row["kind"] for row in csv.DictReader(fh)}
    assert kinds == {"filtered", "smoothed"}


def test_oracle_command():
    r = CliRunner().invoke(main, ["oracle"])
    assert r.exit_code == 0, r.output
    assert r.output.count("[PASS]") == 3

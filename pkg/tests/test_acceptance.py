"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (visible even under
output capture) before asserting. Run with ``pytest tests/test_acceptance.py``
or directly with ``python3 tests/test_acceptance.py``.
"""

import csv
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from skfeeg.checks import check_smoother, check_standardization, check_update
from skfeeg.cli import main
from skfeeg.config import ExperimentConfig, SweepConfig, load_config
from skfeeg.experiment import build_setup, depth_bias_comparison, run_sweep
from skfeeg.kalman import standardization_weights
from skfeeg.linalg import sym_inv_sqrt
from skfeeg.oracles import random_spd
from skfeeg.plots import cell_name
from skfeeg.priors import evolution_variance_from_ep_snr, make_prior_spec, prior_variance_from_pm_snr

ROOT = Path(__file__).resolve().parents[1]


class _Reporter:
    def __init__(self, capsys=None):
        self.capsys = capsys

    def __call__(self, number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        if self.capsys is None:
            print(line)
        else:
            with self.capsys.disabled():
                print("\n" + line)
        assert ok, line


@pytest.fixture
def report(capsys):
    return _Reporter(capsys)


def _means(records, field, **match):
    vals = [getattr(r, field) for r in records
            if all(getattr(r, k) == v for k, v in match.items())]
    assert vals, match
    return float(np.mean(vals)), len(vals)


def test_information_form_oracle(report):
    t0 = time.perf_counter()
    ok, worst = check_update(seed=101, n_instances=100, tol=1e-8)
    dt = time.perf_counter() - t0
    report(1, ok and dt < 5.0, f"update vs information form, 100 instances, max rel err "
                               f"{worst:.2e} (tol 1e-8), {dt:.2f} s (limit 5 s)")


def test_batch_map_smoother_oracle(report):
    t0 = time.perf_counter()
    ok, worst = check_smoother(seed=202, n_instances=50, tol=1e-6)
    dt = time.perf_counter() - t0
    report(2, ok and dt < 10.0, f"RTS vs joint MAP, 50 instances, max rel err {worst:.2e} "
                                f"(tol 1e-6), {dt:.2f} s (limit 10 s)")


def test_standardization_identities(report):
    ok_ab, e_diag, e_pow = check_standardization(seed=303, n_instances=100,
                                                 tol_diag=1e-8, tol_pow=1e-10)
    # (c): alpha = 0.5 is Diag[P^-1/2 K S K^T P^-1/2]^(-1/2), formed densely
    rng = np.random.default_rng(304)
    worst_c = 0.0
    for _ in range(100):
        n, m = int(rng.integers(1, 21)), int(rng.integers(1, 9))
        P, R = random_spd(rng, n), random_spd(rng, m)
        L = rng.standard_normal((m, n))
        S = L @ P @ L.T + R
        K = np.linalg.solve(S, L @ P).T
        Pis = sym_inv_sqrt(P)
        ref = np.diag(np.diag(Pis @ K @ S @ K.T @ Pis) ** -0.5)
        got = np.diag(standardization_weights(Pis, K, S, 0.5))
        worst_c = max(worst_c, float(np.abs(got - ref).max() / np.abs(ref).max()))
    ok_c = worst_c < 1e-12
    report(3, ok_ab and ok_c, f"(a) diag identity {e_diag:.2e} (tol 1e-8); (b) exponent "
                              f"{e_pow:.2e} (tol 1e-10); (c) alpha 0.5 vs definition {worst_c:.2e}")


def test_prior_parameterization(report):
    hand = [
        (prior_variance_from_pm_snr(0.0, 0.1, 2.0, 100), 4e-4),
        (prior_variance_from_pm_snr(20.0, 0.1, 2.0, 100), 0.04),
        (evolution_variance_from_ep_snr(0.0, 4e-4, 40), 1e-5),
        (evolution_variance_from_ep_snr(20.0, 4e-4, 40), 1e-3),
    ]
    hand_err = max(abs(a - b) / b for a, b in hand)
    cfg = ExperimentConfig()
    setup = build_setup(cfg)
    worst = 0.0
    n_points = 0
    for ep in cfg.sweep.ep_snr_db:
        for pm in cfg.sweep.pm_snr_db:
            for nd in cfg.sweep.noise_db:
                spec = make_prior_spec(pm, ep, 10 ** (-nd / 20), cfg.signal.amplitude,
                                       setup.space.n_nodes, setup.waves.n_steps)
                kappa_sq = 10 ** (ep / 10)
                lhs = setup.waves.n_steps * spec.tau_i_sq
                worst = max(worst, abs(lhs - kappa_sq * spec.theta0) / (kappa_sq * spec.theta0))
                n_points += 1
    ok = hand_err < 1e-14 and worst <= 4 * np.finfo(float).eps
    report(4, ok, f"hand values rel err {hand_err:.1e}; K*tau^2 = kappa^2*theta0 over "
                  f"{n_points} grid points, max rel err {worst:.1e}")


def test_depth_bias_mitigation(report):
    cfg = ExperimentConfig()
    setup = build_setup(cfg)
    depth = 1.0 - np.linalg.norm(setup.space.nodes[setup.placement.deep_node]) / \
        cfg.geometry.brain_radius
    t0 = time.perf_counter()
    rows = depth_bias_comparison(cfg, noise_db=30.0, ep=20.0, pm=0.0, alpha=0.5)
    dt = time.perf_counter() - t0
    wins = sum(s <= r for _, s, r in rows)
    worst = max(s for _, s, _ in rows)
    ok = depth >= 0.6 and len(rows) == 5 and wins >= 4 and worst <= 20.0 and dt < 600
    pairs = ", ".join(f"{s:.1f}/{r:.1f}" for _, s, r in rows)
    report(5, ok, f"deep source at depth {depth:.0%}, standardized/raw error mm per rep: {pairs}; "
                  f"{wins}/5 not worse, max standardized {worst:.1f} mm (limit 20), {dt:.1f} s")


def test_echo_suppression_by_smoothing(report, tmp_path):
    cfg = ExperimentConfig().with_overrides(sweep=SweepConfig(
        ep_snr_db=[20.0], pm_snr_db=[0.0], noise_db=[30.0], alpha=[1.25], smoothing=[False, True]))
    records = run_sweep(cfg, tmp_path, plots=False)
    filt, n1 = _means(records, "echo_ratio", smoothing=False)
    smo, n2 = _means(records, "echo_ratio", smoothing=True)
    ok = n1 == n2 == 5 and smo < filt
    report(6, ok, f"mean echo ratio at 30 dB, EP 20, PM 0, alpha 1.25: filtered {filt:.4f}, "
                  f"smoothed {smo:.4f} over {n1} reps")


def test_low_noise_level_tuning_trend(report, tmp_path):
    cfg = ExperimentConfig().with_overrides(sweep=SweepConfig(
        ep_snr_db=[0.0, 20.0], pm_snr_db=[0.0, 20.0], noise_db=[10.0], alpha=[0.5],
        smoothing=[False]))
    records = run_sweep(cfg, tmp_path, plots=False)

    def total(ep, pm):
        d, n = _means(records, "loc_err_deep_mm", ep_snr_db=ep, pm_snr_db=pm)
        s, _ = _means(records, "loc_err_sup_mm", ep_snr_db=ep, pm_snr_db=pm)
        return d + s, n

    low, n = total(0.0, 0.0)
    high, _ = total(20.0, 20.0)
    report(7, n == 5 and low <= high, f"10 dB, alpha 0.5: mean deep+sup error (EP 0, PM 0) "
                                      f"{low:.2f} mm vs (EP 20, PM 20) {high:.2f} mm over {n} reps")


def test_full_sweep_determinism(report, tmp_path):
    cfg = load_config(ROOT / "configs" / "default.yaml")
    t0 = time.perf_counter()
    a = run_sweep(cfg, tmp_path / "a", plots=False)
    run_sweep(cfg, tmp_path / "b", plots=False)
    dt = time.perf_counter() - t0
    same = (tmp_path / "a" / "results.csv").read_bytes() == \
        (tmp_path / "b" / "results.csv").read_bytes()
    ok = same and all(r.status == "ok" for r in a)
    report(8, ok, f"two default sweeps ({len(a)} rows each) give "
                  f"{'byte-identical' if same else 'DIFFERENT'} results.csv, {dt:.1f} s total")


def test_exponent_study_single_command(report, tmp_path):
    out = tmp_path / "study"
    res = CliRunner().invoke(main, ["sweep", "--config", str(ROOT / "configs" / "exponent_study.yaml"),
                                    "--out", str(out)])
    panel = out / "plots" / "alpha_panel_noise30_ep20_pm0_smooth.svg"
    refs = []
    if panel.exists():
        text = panel.read_text()
        refs = [a for a in (1.0, 1.25, 1.5) if cell_name(20.0, 0.0, 30.0, a, True) in text]
    with open(out / "summary.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    alphas = sorted(float(r["alpha"]) for r in rows)
    ok = res.exit_code == 0 and len(refs) == 3 and alphas == [1.0, 1.25, 1.5] and \
        all(r["smoothing"] == "true" and float(r["noise_db"]) == 30.0 for r in rows)
    summary = "; ".join(f"alpha {float(r['alpha']):g}: deep {float(r['loc_err_deep_mm_mean']):.1f} mm, "
                        f"sup {float(r['loc_err_sup_mm_mean']):.1f} mm, echo "
                        f"{float(r['echo_ratio_mean']):.3f}" for r in rows)
    report(9, ok, f"`skfeeg sweep --config configs/exponent_study.yaml` wrote {panel.name} "
                  f"with {len(refs)} smoothed 30 dB cells ({summary})")


if __name__ == "__main__":
    import sys
    import tempfile

    rep = _Reporter()
    failed = 0
    tests = [v for k, v in list(globals().items()) if k.startswith("test_")]
    for fn in tests:
        with tempfile.TemporaryDirectory() as tmp:
            args = [rep] + ([Path(tmp)] if "tmp_path" in fn.__code__.co_varnames else [])
            try:
                fn(*args)
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

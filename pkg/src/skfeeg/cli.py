"""Command line entry point: ``skfeeg <subcommand>``.

Environment overrides: ``SKFEEG_SEED`` (base seed) and ``SKFEEG_JOBS``
(worker processes for ``sweep``). Explicit flags win over the environment.
"""

import sys
from pathlib import Path

import click
import numpy as np

from .config import ConfigError, ExperimentConfig, load_config

CONFIG_HELP = "YAML experiment config (defaults are used when omitted)."


def _load(config_path, seed):
    try:
        cfg = load_config(config_path) if config_path else ExperimentConfig()
    except ConfigError as err:
        raise click.ClickException(str(err))
    return cfg.with_overrides(base_seed=seed)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Standardized Kalman filter source imaging experiments."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help=CONFIG_HELP)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, envvar="SKFEEG_SEED")
@click.option("--noise-db", type=float, default=30.0, show_default=True)
@click.option("--rep", type=int, default=0, show_default=True)
@click.option("--leadfield/--no-leadfield", default=False, help="Also write leadfield.csv.")
def simulate(config_path, out, seed, noise_db, rep, leadfield):
    """Write ground-truth waveforms and clean/noisy measurements."""
    from .experiment import simulate as sim
    from .exports import write_leadfield_csv, write_measurements_csv, write_waveforms_csv

    cfg = _load(config_path, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    setup, meas = sim(cfg, noise_db, rep)
    write_waveforms_csv(out / "waveforms.csv", setup.waves)
    write_measurements_csv(out / "clean.csv", setup.waves.times, meas.clean)
    write_measurements_csv(out / "noisy.csv", setup.waves.times, meas.noisy)
    if leadfield:
        write_leadfield_csv(out / "leadfield.csv", setup.lead)
    click.echo(f"seed {meas.seed}, noise std {meas.noise_std:.6g} V, "
               f"{setup.space.n_nodes} nodes, {setup.lead.n_electrodes} electrodes")


@main.command("filter")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help=CONFIG_HELP)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--seed", type=int, envvar="SKFEEG_SEED")
@click.option("--ep", type=float, default=20.0, show_default=True, help="EP-SNR (dB).")
@click.option("--pm", type=float, default=0.0, show_default=True, help="PM-SNR (dB).")
@click.option("--noise-db", type=float, default=30.0, show_default=True)
@click.option("--alpha", type=float, default=1.25, show_default=True)
@click.option("--smooth/--no-smooth", default=True, show_default=True)
@click.option("--rep", type=int, default=0, show_default=True)
def filter_cmd(config_path, out, seed, ep, pm, noise_db, alpha, smooth, rep):
    """Filter (and smooth) one simulated dataset; write amplitudes and diagnostics."""
    from .experiment import simulate as sim
    from .exports import write_amplitudes_csv, write_diagnostics_csv
    from .kalman import run_filter
    from .metrics import amplitude_map, evaluate
    from .priors import make_prior_spec
    from .smoother import smooth as run_smoother

    cfg = _load(config_path, seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    setup, meas = sim(cfg, noise_db, rep)
    waves, space = setup.waves, setup.space
    sigma = meas.noise_std
    if cfg.prior.noise_scale == "relative":
        sigma /= float(np.max(np.abs(meas.clean)))
    prior = make_prior_spec(pm, ep, sigma, cfg.signal.amplitude, space.n_nodes, waves.n_steps)
    traj = run_filter(setup.lead, prior, meas, alpha, unit_scale=waves.unit_scale)
    series = {"filtered": amplitude_map(traj.standardized(), space.nodes, waves.dt)}
    sm = None
    if smooth:
        sm = run_smoother(traj, alpha, weights_from=cfg.prior.weights_from)
        series["smoothed"] = amplitude_map(sm.standardized, space.nodes, waves.dt)
    write_amplitudes_csv(out / "amplitudes.csv", series)
    write_diagnostics_csv(out / "diagnostics.csv", traj, sm)
    click.echo(f"theta0 {prior.theta0:.6g}, tau_i^2 {prior.tau_i_sq:.6g}")
    for kind, rec in series.items():
        rep_ = evaluate(rec, setup.placement.deep_node, setup.placement.superficial_node, waves,
                        deep_region_radius=cfg.metrics.deep_region_radius)
        vals = ", ".join(f"{k} {v:.4g}" for k, v in rep_.as_dict().items())
        click.echo(f"{kind}: {vals}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help=CONFIG_HELP)
@click.option("--out", type=click.Path(file_okay=False), help="Output directory (default: config output_dir).")
@click.option("--jobs", type=click.IntRange(min=1), default=1, envvar="SKFEEG_JOBS", show_default=True)
@click.option("--seed", type=int, envvar="SKFEEG_SEED")
@click.option("--plots/--no-plots", default=True, show_default=True)
def sweep(config_path, out, jobs, seed, plots):
    """Run the full prior-parameter sweep; exits nonzero if any cell failed."""
    from .experiment import run_sweep

    cfg = _load(config_path, seed)
    out = out or cfg.output_dir
    records = run_sweep(cfg, out, jobs=jobs, plots=plots)
    failed = sum(r.status != "ok" for r in records)
    click.echo(f"{len(records)} rows written to {Path(out) / 'results.csv'}; {failed} failed")
    if failed:
        sys.exit(1)


@main.command()
@click.option("--results", type=click.Path(exists=True, file_okay=False), required=True,
              help="Directory produced by `sweep`.")
@click.option("--out", type=click.Path(file_okay=False), help="Plot directory (default: <results>/plots).")
def plot(results, out):
    """Render SVG plots from a finished sweep."""
    from .plots import emit_plots

    files = emit_plots(results, out or Path(results) / "plots")
    click.echo(f"{len(files)} SVG files written")


@main.command()
@click.option("--seed", type=int, default=0, envvar="SKFEEG_SEED", show_default=True)
def oracle(seed):
    """Run the small-instance oracle suites."""
    from .checks import run_all

    ok = True
    for name, passed, detail in run_all(seed):
        ok &= passed
        click.echo(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    if not ok:
        sys.exit(1)


if __name__ == "__main__":
    main()

"""Simulate -> filter (-> smooth) -> score, over a grid of prior settings.

Seeding
-------
Each measurement realization uses

    seed = base_seed XOR blake2b("noise_db=<x>;rep=<i>", 8 bytes, little endian)

so every filter setting at a given noise level and repetition sees the
same noisy data (paired comparisons), and results do not depend on the
order or parallelism in which cells run.
"""

import csv
import hashlib
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, dump_config
from .errors import NumericalFailure
from .geometry import assemble_lead_field, build_electrode_array, build_source_space
from .kalman import run_filter
from .metrics import amplitude_map, evaluate
from .priors import make_prior_spec
from .signals import TIMINGS, add_noise, make_sep_waveforms, place_sources, synthesize_measurements
from .smoother import rts_backward, standardize_smoothed

__all__ = [
    "Setup",
    "ResultRecord",
    "RESULT_COLUMNS",
    "cell_seed",
    "build_setup",
    "simulate",
    "run_cell",
    "depth_bias_comparison",
    "iter_cells",
    "run_sweep",
    "summarize",
    "write_csv",
]

_MASK64 = (1 << 64) - 1


def cell_seed(base_seed, noise_db, rep_index):
    key = f"noise_db={float(noise_db)!r};rep={int(rep_index)}".encode()
    h = int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")
    return (int(base_seed) ^ h) & _MASK64


@dataclass(frozen=True)
class Setup:
    space: object
    electrodes: object
    lead: object
    placement: object
    waves: object  # with the configured source selection applied
    waves_full: object


@lru_cache(maxsize=8)
def _setup_cached(geometry_json, signal_json):
    from .config import GeometryConfig, SignalConfig

    g = GeometryConfig.model_validate_json(geometry_json)
    s = SignalConfig.model_validate_json(signal_json)
    electrodes = build_electrode_array(g.electrode_count, g.scalp_radius)
    space = build_source_space(g.node_spacing, g.brain_radius, min_z=g.min_z)
    lead = assemble_lead_field(space, electrodes, g.conductivity)
    placement = place_sources(space, s.deep_position, s.deep_moment,
                              s.superficial_position, s.superficial_moment)
    t_deep, t_sup, width, total = TIMINGS[s.timing]
    waves = make_sep_waveforms(s.dt, total, t_deep, t_sup, width, s.amplitude,
                               amplitude_unit=s.amplitude_unit)
    return Setup(space, electrodes, lead, placement, waves.only(s.sources), waves)


def build_setup(config):
    """Geometry, lead field, placement and waveforms (cached per process)."""
    return _setup_cached(config.geometry.model_dump_json(), config.signal.model_dump_json())


def simulate(config, noise_db, rep_index):
    """Clean and noisy measurements for one (noise level, repetition)."""
    setup = build_setup(config)
    clean = synthesize_measurements(setup.lead, setup.placement, setup.waves)
    return setup, add_noise(clean, noise_db, cell_seed(config.base_seed, noise_db, rep_index))


@dataclass
class ResultRecord:
    ep_snr_db: float
    pm_snr_db: float
    noise_db: float
    alpha: float
    smoothing: bool
    rep: int
    seed: int
    base_seed: int
    status: str
    loc_err_deep_mm: float
    loc_err_sup_mm: float
    echo_ratio: float
    corr_deep: float
    corr_sup: float
    theta0: float
    tau_i_sq: float
    noise_std: float
    smoother_invoked: bool
    timing: str
    sources: str
    noise_scale: str
    weights_from: str
    n_nodes: int
    n_electrodes: int
    n_steps: int
    version: str
    wall_clock_s: float = 0.0
    trace_deep: np.ndarray = field(default=None, repr=False)
    trace_sup: np.ndarray = field(default=None, repr=False)

    def key(self):
        return (self.ep_snr_db, self.pm_snr_db, self.noise_db, self.alpha, self.smoothing)


# wall-clock and traces are kept out of results.csv so it is reproducible byte for byte
RESULT_COLUMNS = [f.name for f in fields(ResultRecord)
                  if f.name not in ("wall_clock_s", "trace_deep", "trace_sup")]
_METRICS = ("loc_err_deep_mm", "loc_err_sup_mm", "echo_ratio", "corr_deep", "corr_sup")


def _evaluate_group(config, ep, pm, noise_db, rep, cells):
    """Run one filter pass and score every (alpha, smoothing) cell on it."""
    t0 = time.perf_counter()
    setup, meas = simulate(config, noise_db, rep)
    space, waves = setup.space, setup.waves
    peak = float(np.max(np.abs(meas.clean)))
    sigma = meas.noise_std / peak if config.prior.noise_scale == "relative" else meas.noise_std
    prior = make_prior_spec(pm, ep, sigma, config.signal.amplitude, space.n_nodes, waves.n_steps)
    base = dict(
        ep_snr_db=float(ep), pm_snr_db=float(pm), noise_db=float(noise_db), rep=int(rep),
        seed=meas.seed, base_seed=int(config.base_seed), theta0=prior.theta0,
        tau_i_sq=prior.tau_i_sq, noise_std=meas.noise_std, timing=config.signal.timing,
        sources=config.signal.sources, noise_scale=config.prior.noise_scale,
        weights_from=config.prior.weights_from, n_nodes=space.n_nodes,
        n_electrodes=setup.lead.n_electrodes, n_steps=waves.n_steps, version=__version__,
    )
    nan = float("nan")
    failed = {k: nan for k in _METRICS}
    unit = waves.unit_scale
    dp, sp = setup.placement.deep_node, setup.placement.superficial_node
    try:
        traj = run_filter(setup.lead, prior, meas, cells[0][0], unit_scale=unit)
        smoothed = rts_backward(traj) if any(s for _, s in cells) else None
    except NumericalFailure as err:
        shared = time.perf_counter() - t0
        return [ResultRecord(alpha=float(a), smoothing=bool(s), status=f"failed: {err}",
                             smoother_invoked=False, wall_clock_s=shared, **failed, **base)
                for a, s in cells]
    shared = time.perf_counter() - t0
    out = []
    for alpha, smoothing in cells:
        t1 = time.perf_counter()
        try:
            if smoothing:
                Z = standardize_smoothed(smoothed, traj, alpha,
                                         weights_from=config.prior.weights_from)
            else:
                Z = traj.restandardize(alpha)
            recon = amplitude_map(Z, space.nodes, waves.dt)
            report = evaluate(recon, dp, sp, waves,
                              deep_region_radius=config.metrics.deep_region_radius)
            metrics, status = report.as_dict(), "ok"
            traces = recon.amplitudes[dp].copy(), recon.amplitudes[sp].copy()
        except NumericalFailure as err:
            metrics, status, traces = failed, f"failed: {err}", (None, None)
        out.append(ResultRecord(
            alpha=float(alpha), smoothing=bool(smoothing), status=status,
            smoother_invoked=bool(smoothing), **metrics, **base,
            wall_clock_s=shared + time.perf_counter() - t1,
            trace_deep=traces[0], trace_sup=traces[1],
        ))
    return out


def run_cell(config, ep, pm, noise_db, alpha, smoothing, rep_index):
    """Evaluate a single sweep cell; deterministic for a given config."""
    return _evaluate_group(config, ep, pm, noise_db, rep_index, [(alpha, smoothing)])[0]


def depth_bias_comparison(config, noise_db=30.0, ep=20.0, pm=0.0, alpha=0.5):
    """Deep-source localization error, standardized vs raw filtered mean.

    The deep source is simulated alone. Returns a list of
    ``(rep, standardized_mm, unstandardized_mm)``, one per repetition.
    """
    from .metrics import localization_error

    cfg = config.with_overrides(signal=config.signal.model_copy(update={"sources": "deep"}))
    out = []
    for rep in range(cfg.repetitions):
        setup, meas = simulate(cfg, noise_db, rep)
        space, waves = setup.space, setup.waves
        sigma = meas.noise_std
        if cfg.prior.noise_scale == "relative":
            sigma /= float(np.max(np.abs(meas.clean)))
        prior = make_prior_spec(pm, ep, sigma, cfg.signal.amplitude, space.n_nodes, waves.n_steps)
        traj = run_filter(setup.lead, prior, meas, alpha, unit_scale=waves.unit_scale)
        t_deep = waves.peak_indices()[0]
        true_pos = space.nodes[setup.placement.deep_node]
        std = amplitude_map(traj.standardized(), space.nodes, waves.dt)
        raw = amplitude_map(traj.filtered_means(), space.nodes, waves.dt)
        out.append((rep, localization_error(std, t_deep, true_pos),
                    localization_error(raw, t_deep, true_pos)))
    return out


def iter_cells(config):
    """All (ep, pm, noise, alpha, smoothing, rep) tuples in output order."""
    s = config.sweep
    return list(product(s.ep_snr_db, s.pm_snr_db, s.noise_db, s.alpha, s.smoothing,
                        range(config.repetitions)))


def _groups(config):
    s = config.sweep
    cells = list(product(s.alpha, s.smoothing))
    return [(ep, pm, nd, rep, cells)
            for ep, pm, nd, rep in product(s.ep_snr_db, s.pm_snr_db, s.noise_db,
                                           range(config.repetitions))]


def _group_worker(args):
    config_json, ep, pm, nd, rep, cells = args
    config = ExperimentConfig.model_validate_json(config_json)
    return _evaluate_group(config, ep, pm, nd, rep, cells)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def summarize(records):
    """Mean and sample std of every metric per cell (over repetitions)."""
    cells = {}
    for r in records:
        cells.setdefault(r.key(), []).append(r)
    header = ["ep_snr_db", "pm_snr_db", "noise_db", "alpha", "smoothing", "n", "n_failed"]
    for m in _METRICS:
        header += [f"{m}_mean", f"{m}_std"]
    rows = []
    for key, rs in cells.items():
        row = list(key) + [len(rs), sum(r.status != "ok" for r in rs)]
        for m in _METRICS:
            vals = np.array([getattr(r, m) for r in rs], dtype=float)
            vals = vals[np.isfinite(vals)]
            if vals.size == 0:
                row += [float("nan"), float("nan")]
            else:
                row += [float(vals.mean()), float(vals.std(ddof=1)) if vals.size > 1 else 0.0]
        rows.append(row)
    return header, rows


def _write_traces(path, records, times, waves):
    header = ["ep_snr_db", "pm_snr_db", "noise_db", "alpha", "smoothing", "rep", "step",
              "time_s", "true_deep", "true_sup", "recon_deep", "recon_sup"]
    rows = []
    for r in records:
        if r.trace_deep is None:
            continue
        for k, t in enumerate(times):
            rows.append([r.ep_snr_db, r.pm_snr_db, r.noise_db, r.alpha, r.smoothing, r.rep, k,
                         float(t), float(waves.deep[k]), float(waves.superficial[k]),
                         float(r.trace_deep[k]), float(r.trace_sup[k])])
    write_csv(path, header, rows)


def run_info():
    return {
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "threads": {k: os.environ.get(k) for k in
                    ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")},
    }


def run_sweep(config, out_dir=None, jobs=1, plots=True):
    """Run every cell, write CSV outputs, and return the records.

    Files written to ``out_dir``: ``results.csv`` (one row per cell and
    repetition), ``summary.csv``, ``timings.csv``, ``traces.csv``,
    ``config.yaml``, ``run_info.json`` and, with ``plots``, ``plots/*.svg``.
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups = _groups(config)
    if jobs > 1:
        cj = config.model_dump_json()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            nested = list(pool.map(_group_worker, [(cj, *g) for g in groups]))
    else:
        nested = [_evaluate_group(config, *g) for g in groups]
    by_cell = {}
    for recs in nested:
        for r in recs:
            by_cell[(r.ep_snr_db, r.pm_snr_db, r.noise_db, r.alpha, r.smoothing, r.rep)] = r
    records = [by_cell[c] for c in iter_cells(config)]

    write_csv(out / "results.csv", RESULT_COLUMNS,
              [[getattr(r, c) for c in RESULT_COLUMNS] for r in records])
    write_csv(out / "summary.csv", *summarize(records))
    write_csv(out / "timings.csv",
              ["ep_snr_db", "pm_snr_db", "noise_db", "alpha", "smoothing", "rep", "wall_clock_s"],
              [[*r.key(), r.rep, r.wall_clock_s] for r in records])
    setup = build_setup(config)
    _write_traces(out / "traces.csv", records, setup.waves.times, setup.waves)
    (out / "config.yaml").write_text(dump_config(config))
    (out / "run_info.json").write_text(json.dumps(run_info(), indent=2, sort_keys=True) + "\n")
    if plots:
        from .plots import emit_plots
        emit_plots(out, out / "plots")
    return records

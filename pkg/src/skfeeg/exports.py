"""CSV exports for debugging and downstream analysis."""

import numpy as np

from .experiment import write_csv

__all__ = [
    "write_leadfield_csv",
    "write_waveforms_csv",
    "write_measurements_csv",
    "write_amplitudes_csv",
    "write_diagnostics_csv",
]


def write_leadfield_csv(path, lead):
    """Rows are electrodes, columns ``n<j>_<axis>`` are source components."""
    n_nodes = lead.state_dim // 3
    header = ["electrode"] + [f"n{j}_{a}" for j in range(n_nodes) for a in "xyz"]
    write_csv(path, header, [[i, *row] for i, row in enumerate(lead.matrix)])


def write_waveforms_csv(path, waves):
    write_csv(path, ["time_s", "deep", "superficial"],
              zip(waves.times, waves.deep, waves.superficial))


def write_measurements_csv(path, times, data):
    """``data`` is (m, K); one column per channel."""
    data = np.asarray(data)
    header = ["time_s"] + [f"ch{i}" for i in range(data.shape[0])]
    write_csv(path, header, [[t, *data[:, k]] for k, t in enumerate(times)])


def write_amplitudes_csv(path, series):
    """Node rows by time columns, tagged with a ``kind`` column.

    ``series`` maps a kind label ("filtered", "smoothed", ...) to a
    :class:`~skfeeg.metrics.ReconstructionSeries`.
    """
    first = next(iter(series.values()))
    K = first.n_steps
    header = ["kind", "node", "x", "y", "z"] + [f"t{k}" for k in range(K)]
    rows = []
    for kind, rec in series.items():
        for j, pos in enumerate(rec.positions):
            rows.append([kind, j, *pos, *rec.amplitudes[j]])
    write_csv(path, header, rows)


def write_diagnostics_csv(path, traj, smoothed=None):
    header = ["kind", "step", "trace_P", "max_weight", "innovation_norm"]
    rows = [["filtered", *d] for d in traj.diagnostics()]
    if smoothed is not None:
        for t, (cov, step) in enumerate(zip(smoothed.covs, traj.steps)):
            diag = np.diag(cov) if isinstance(cov, np.ndarray) else cov.diagonal()
            rows.append(["smoothed", t, float(np.sum(diag)), float(step.weights.max()),
                         step.innovation_norm])
    write_csv(path, header, rows)

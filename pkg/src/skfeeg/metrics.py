"""Scalar quality measures for a reconstructed source time series.

Undefined values (zero denominators, constant courses) are reported as
``nan`` rather than raised, so a sweep can carry on.
"""

from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "ReconstructionSeries",
    "MetricReport",
    "UNDEFINED",
    "amplitude_map",
    "localization_error",
    "echo_ratio",
    "waveform_correlation",
    "nodes_within",
    "evaluate",
]

UNDEFINED = float("nan")


@dataclass(frozen=True)
class ReconstructionSeries:
    amplitudes: np.ndarray  # (N, K)
    positions: np.ndarray   # (N, 3), meters
    dt: float

    @property
    def n_steps(self):
        return self.amplitudes.shape[1]


@dataclass(frozen=True)
class MetricReport:
    loc_err_deep_mm: float
    loc_err_sup_mm: float
    echo_ratio: float
    corr_deep: float
    corr_sup: float

    def as_dict(self):
        return asdict(self)


def amplitude_map(vectors, positions, dt=1.0):
    """Per-node Euclidean norm of the 3-component blocks.

    ``vectors`` is a sequence of K state vectors (or a (K, 3N) array).
    """
    Z = np.asarray(vectors, dtype=float)
    if Z.ndim == 1:
        Z = Z[None, :]
    positions = np.asarray(positions, dtype=float)
    N = positions.shape[0]
    if Z.shape[1] != 3 * N:
        raise ValueError(f"state dimension {Z.shape[1]} does not match 3 x {N} nodes")
    amps = np.sqrt(np.einsum("tjk,tjk->jt", Z.reshape(Z.shape[0], N, 3),
                             Z.reshape(Z.shape[0], N, 3)))
    return ReconstructionSeries(amplitudes=amps, positions=positions, dt=float(dt))


def localization_error(recon, t_index, true_pos):
    """Distance in mm from ``true_pos`` to the strongest node at ``t_index``."""
    j = int(np.argmax(recon.amplitudes[:, t_index]))
    return 1e3 * float(np.linalg.norm(recon.positions[j] - np.asarray(true_pos, dtype=float)))


def nodes_within(positions, center, radius):
    d = np.linalg.norm(np.asarray(positions) - np.asarray(center, dtype=float), axis=1)
    return np.flatnonzero(d <= radius)


def echo_ratio(recon, deep_region, t_deep, t_sup):
    """Deep-region activity at the superficial peak relative to the deep peak."""
    region = np.asarray(deep_region, dtype=int)
    if region.size == 0:
        raise ValueError("deep_region is empty")
    den = float(recon.amplitudes[region, t_deep].max())
    if den == 0.0:
        return UNDEFINED
    return float(recon.amplitudes[region, t_sup].max()) / den


def waveform_correlation(recon, node, truth):
    """Pearson correlation of a node's amplitude course with a true waveform."""
    truth = np.asarray(truth, dtype=float)
    if np.ptp(truth) == 0:
        raise ValueError("true waveform is constant")
    course = recon.amplitudes[node]
    if np.ptp(course) == 0:
        return UNDEFINED
    a = course - course.mean()
    b = truth - truth.mean()
    return float(np.clip(a @ b / np.sqrt((a @ a) * (b @ b)), -1.0, 1.0))


def evaluate(recon, deep_node, sup_node, waves, deep_region_radius=0.015):
    """Full :class:`MetricReport` for a two-source reconstruction.

    A silenced source (all-zero waveform) gets ``nan`` for its own metrics.
    """
    pos = recon.positions
    deep_active = np.any(waves.deep > 0)
    sup_active = np.any(waves.superficial > 0)
    t_deep, t_sup = waves.peak_indices()
    region = nodes_within(pos, pos[deep_node], deep_region_radius)
    return MetricReport(
        loc_err_deep_mm=localization_error(recon, t_deep, pos[deep_node]) if deep_active else UNDEFINED,
        loc_err_sup_mm=localization_error(recon, t_sup, pos[sup_node]) if sup_active else UNDEFINED,
        echo_ratio=echo_ratio(recon, region, t_deep, t_sup) if deep_active and sup_active else UNDEFINED,
        corr_deep=waveform_correlation(recon, deep_node, waves.deep) if deep_active else UNDEFINED,
        corr_sup=waveform_correlation(recon, sup_node, waves.superficial) if sup_active else UNDEFINED,
    )

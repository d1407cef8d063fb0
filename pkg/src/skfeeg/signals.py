"""Synthetic two-source evoked response and noisy scalp measurements."""

from dataclasses import dataclass

import numpy as np

from .geometry import nearest_node

__all__ = [
    "AMPLITUDE_UNITS",
    "SourcePlacement",
    "SourceWaveforms",
    "MeasurementSet",
    "TIMINGS",
    "place_sources",
    "hann_bump",
    "make_sep_waveforms",
    "source_states",
    "synthesize_measurements",
    "add_noise",
    "noise_std_for",
]

# A*m per amplitude unit
AMPLITUDE_UNITS = {"nA*m": 1e-9, "uA*m": 1e-6, "A*m": 1.0}

# (deep peak, superficial peak, bump width, total duration) in seconds.
# "caption": peaks 1 ms apart, overlapping bumps.
# "prose": peaks 2 ms apart, bumps touching at the midpoint.
TIMINGS = {
    "caption": (1.5e-3, 2.5e-3, 2e-3, 4e-3),
    "prose": (1.0e-3, 3.0e-3, 2e-3, 4e-3),
}


@dataclass(frozen=True)
class SourcePlacement:
    deep_node: int
    deep_moment_dir: np.ndarray
    superficial_node: int
    superficial_moment_dir: np.ndarray

    def __post_init__(self):
        if self.deep_node == self.superficial_node:
            raise ValueError("deep and superficial sources must sit on different nodes")
        for name in ("deep_moment_dir", "superficial_moment_dir"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"{name} must be a unit 3-vector")

    def check_depths(self, space):
        deep = np.linalg.norm(space.nodes[self.deep_node])
        sup = np.linalg.norm(space.nodes[self.superficial_node])
        if not deep < sup:
            raise ValueError(
                f"deep node radius {deep:.4g} m is not below superficial radius {sup:.4g} m"
            )


def place_sources(space, deep_position, deep_moment, superficial_position,
                  superficial_moment):
    """Snap target positions to the nearest nodes and normalize moments."""
    dm = np.asarray(deep_moment, dtype=float)
    sm = np.asarray(superficial_moment, dtype=float)
    placement = SourcePlacement(
        deep_node=nearest_node(space, deep_position),
        deep_moment_dir=dm / np.linalg.norm(dm),
        superficial_node=nearest_node(space, superficial_position),
        superficial_moment_dir=sm / np.linalg.norm(sm),
    )
    placement.check_depths(space)
    return placement


@dataclass(frozen=True)
class SourceWaveforms:
    dt: float
    n_steps: int
    deep: np.ndarray
    superficial: np.ndarray
    amplitude_unit: str = "nA*m"

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps)

    @property
    def unit_scale(self):
        return AMPLITUDE_UNITS[self.amplitude_unit]

    def peak_indices(self):
        return int(np.argmax(self.deep)), int(np.argmax(self.superficial))

    def only(self, which):
        """Copy with one source silenced: ``which`` is "deep" or "superficial"."""
        if which == "both":
            return self
        zero = np.zeros(self.n_steps)
        if which == "deep":
            return SourceWaveforms(self.dt, self.n_steps, self.deep, zero, self.amplitude_unit)
        if which == "superficial":
            return SourceWaveforms(self.dt, self.n_steps, zero, self.superficial,
                                   self.amplitude_unit)
        raise ValueError(f"unknown source selection {which!r}")


def hann_bump(t, center, width, amplitude):
    """Raised-cosine bump of full width ``width``; zero outside its support."""
    u = (np.asarray(t, dtype=float) - center) / width
    out = amplitude * np.cos(np.pi * u) ** 2
    return np.where(np.abs(u) <= 0.5, out, 0.0)


def make_sep_waveforms(dt, total_duration, t_deep_peak, t_sup_peak, peak_width,
                       amplitude, amplitude_unit="nA*m"):
    if not peak_width > 0:
        raise ValueError(f"peak_width must be positive, got {peak_width}")
    if not 0 < dt <= peak_width / 4:
        raise ValueError(f"need 0 < dt <= peak_width/4, got dt={dt}")
    half = peak_width / 2
    tol = 1e-9 * total_duration
    for name, tp in (("t_deep_peak", t_deep_peak), ("t_sup_peak", t_sup_peak)):
        if not 0 < tp < total_duration:
            raise ValueError(f"{name}={tp} outside (0, {total_duration})")
        if tp - half < -tol or tp + half > total_duration + tol:
            raise ValueError(f"{name}={tp}: bump support leaves [0, {total_duration}]")
    if amplitude_unit not in AMPLITUDE_UNITS:
        raise ValueError(f"unknown amplitude unit {amplitude_unit!r}")
    K = int(round(total_duration / dt))
    t = dt * np.arange(K)
    return SourceWaveforms(
        dt=float(dt), n_steps=K,
        deep=hann_bump(t, t_deep_peak, peak_width, amplitude),
        superficial=hann_bump(t, t_sup_peak, peak_width, amplitude),
        amplitude_unit=amplitude_unit,
    )


def source_states(placement, waves, state_dim):
    """Ground-truth state sequence, shape (n, K), in the waveform unit."""
    X = np.zeros((state_dim, waves.n_steps))
    for node, direction, wave in (
        (placement.deep_node, placement.deep_moment_dir, waves.deep),
        (placement.superficial_node, placement.superficial_moment_dir, waves.superficial),
    ):
        if not 0 <= node < state_dim // 3:
            raise ValueError(f"node index {node} out of range")
        X[3 * node:3 * node + 3, :] += np.outer(direction, wave)
    return X


def synthesize_measurements(lead, placement, waves):
    """Clean scalp potentials (volts), shape (m, K)."""
    n_nodes = lead.state_dim // 3
    for node in (placement.deep_node, placement.superficial_node):
        if not 0 <= node < n_nodes:
            raise ValueError(f"node index {node} out of range for {n_nodes} nodes")
    scale = waves.unit_scale
    out = np.zeros((lead.n_electrodes, waves.n_steps))
    for node, direction, wave in (
        (placement.deep_node, placement.deep_moment_dir, waves.deep),
        (placement.superficial_node, placement.superficial_moment_dir, waves.superficial),
    ):
        topo = scale * (lead.node_block(node) @ direction)
        out += np.outer(topo, wave)
    return out


@dataclass(frozen=True)
class MeasurementSet:
    clean: np.ndarray
    noisy: np.ndarray
    noise_std: float
    peak_snr_db: float
    seed: int

    @property
    def n_steps(self):
        return self.clean.shape[1]


def noise_std_for(clean, peak_snr_db):
    peak = float(np.max(np.abs(clean)))
    if peak == 0.0:
        raise ValueError("clean measurements are all zero; peak-SNR is undefined")
    return peak / 10.0 ** (peak_snr_db / 20.0)


def add_noise(clean, peak_snr_db, seed):
    """Add white Gaussian noise at the requested peak-SNR.

    Noise is drawn from ``numpy.random.default_rng(seed)`` (PCG64) as a
    single ``standard_normal(clean.shape)`` call, so a seed always maps
    to the same realization.
    """
    clean = np.asarray(clean, dtype=float)
    sigma = noise_std_for(clean, peak_snr_db)
    rng = np.random.default_rng(seed)
    noisy = clean + sigma * rng.standard_normal(clean.shape)
    return MeasurementSet(clean=clean, noisy=noisy, noise_std=sigma,
                          peak_snr_db=float(peak_snr_db), seed=int(seed))

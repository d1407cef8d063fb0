"""Prior and evolution variances from decibel tuning parameters.

Two knobs control the random-walk source model:

* PM-SNR sets the per-component prior variance ``theta0`` through the
  total prior standard deviation ``sqrt(theta_tot) = 10**(pm/20)``:
  ``theta0 = theta_tot * sigma**2 * A**2 / N``.
* EP-SNR sets the net evolution variance relative to the prior,
  ``kappa = 10**(ep/20)`` and ``tau**2 = kappa**2 * theta0``, spread evenly
  over ``K`` steps so the chain's total drive does not depend on ``K``.

All decibel conversions use the amplitude convention ``dB(x) = 20 log10 x``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PriorSpec",
    "db_to_amplitude",
    "amplitude_to_db",
    "prior_variance_from_pm_snr",
    "evolution_variance_from_ep_snr",
    "make_prior_spec",
    "build_model_matrices",
]


def db_to_amplitude(db):
    return 10.0 ** (db / 20.0)


def amplitude_to_db(x):
    return 20.0 * np.log10(x)


@dataclass(frozen=True)
class PriorSpec:
    pm_snr_db: float
    ep_snr_db: float
    theta0: float
    tau_i_sq: float
    n_sources: int
    n_steps: int
    sigma: float
    amplitude: float

    def __post_init__(self):
        if not self.theta0 > 0:
            raise ValueError(f"theta0 must be positive, got {self.theta0}")
        if self.tau_i_sq < 0:
            raise ValueError(f"tau_i_sq must be non-negative, got {self.tau_i_sq}")


def prior_variance_from_pm_snr(pm_snr_db, sigma, amplitude, n_sources):
    """Per-component prior variance ``theta0``."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not amplitude > 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if n_sources < 1:
        raise ValueError(f"n_sources must be >= 1, got {n_sources}")
    theta_tot = 10.0 ** (pm_snr_db / 10.0)
    return theta_tot * sigma ** 2 * amplitude ** 2 / n_sources


def evolution_variance_from_ep_snr(ep_snr_db, theta0, n_steps):
    """Per-step evolution variance ``tau_i**2 = kappa**2 * theta0 / K``."""
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps}")
    if not theta0 > 0:
        raise ValueError(f"theta0 must be positive, got {theta0}")
    kappa_sq = 10.0 ** (ep_snr_db / 10.0)
    return kappa_sq * theta0 / n_steps


def make_prior_spec(pm_snr_db, ep_snr_db, sigma, amplitude, n_sources, n_steps,
                    static=False):
    """Assemble a :class:`PriorSpec`.

    ``static=True`` zeroes the evolution variance (no random-walk drive),
    which is only meant for testing.
    """
    theta0 = prior_variance_from_pm_snr(pm_snr_db, sigma, amplitude, n_sources)
    tau = 0.0 if static else evolution_variance_from_ep_snr(ep_snr_db, theta0, n_steps)
    return PriorSpec(pm_snr_db=float(pm_snr_db), ep_snr_db=float(ep_snr_db),
                     theta0=theta0, tau_i_sq=tau, n_sources=int(n_sources),
                     n_steps=int(n_steps), sigma=float(sigma), amplitude=float(amplitude))


def build_model_matrices(spec, state_dim):
    """Dense ``(P0, Q, A)`` for the random-walk model."""
    if state_dim != 3 * spec.n_sources:
        raise ValueError(
            f"state_dim {state_dim} does not match 3 * n_sources = {3 * spec.n_sources}"
        )
    eye = np.eye(state_dim)
    return spec.theta0 * eye, spec.tau_i_sq * eye, eye.copy()

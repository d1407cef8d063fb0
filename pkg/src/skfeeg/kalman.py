"""Standardized Kalman filter with a tunable standardization exponent.

Each step runs the ordinary predict/update recursion and then, strictly
after the fact, forms the standardized estimate

    z_t = W_t(alpha) P_pred^{-1/2} x_filt,
    W_t(alpha) = Diag[P_pred^{-1/2} K S K^T P_pred^{-1/2}]^{-alpha}.

``alpha = 0.5`` is the classical sLORETA-style weighting; larger values
push harder against depth bias. The weights never feed back into the
recursion.

Two execution paths share these definitions. :func:`kalman_filter` works
on dense matrices and accepts any transition/process noise.
:func:`run_filter` detects the isotropic random-walk model built from a
:class:`~skfeeg.priors.PriorSpec` and keeps every covariance in
:class:`~skfeeg.linalg.SubspaceMatrix` form, which is exact (up to
rounding) and makes full-size head models cheap.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure
from .linalg import SubspaceMatrix, spd_factor, symmetrize, sym_inv_sqrt
from scipy.linalg import cho_solve

__all__ = [
    "GaussianBelief",
    "StepRecord",
    "FilterTrajectory",
    "WEIGHT_FLOOR",
    "predict",
    "update",
    "standardization_diagonal",
    "weights_from_diagonal",
    "standardization_weights",
    "standardize",
    "kalman_filter",
    "run_filter",
    "lead_subspace",
]

WEIGHT_FLOOR = 1e-300


@dataclass
class GaussianBelief:
    mean: np.ndarray
    cov: object  # ndarray or SubspaceMatrix

    def dense_cov(self):
        return np.asarray(self.cov)

    def variances(self):
        if isinstance(self.cov, SubspaceMatrix):
            return self.cov.diagonal()
        return np.diag(self.cov).copy()

    def check(self, rtol=1e-10):
        """Raise ``ValueError`` if the covariance is not numerically symmetric PSD."""
        C = self.dense_cov()
        scale = max(np.abs(C).max(), np.finfo(float).tiny)
        if np.abs(C - C.T).max() > rtol * scale:
            raise ValueError("covariance is not symmetric")
        vals = np.linalg.eigvalsh(symmetrize(C))
        if vals.min() < -rtol * max(vals.max(), 0.0):
            raise ValueError(f"covariance has negative eigenvalue {vals.min():.3e}")


@dataclass
class StepRecord:
    predicted: GaussianBelief
    filtered: GaussianBelief
    gain: np.ndarray            # (n, m)
    innovation_cov: np.ndarray  # (m, m)
    pred_inv_sqrt: object       # P_pred^{-1/2}, ndarray or SubspaceMatrix
    std_diag: np.ndarray        # diagonal before the exponent is applied
    weights: np.ndarray         # std_diag ** -alpha
    standardized: np.ndarray
    innovation_norm: float = 0.0


@dataclass
class FilterTrajectory:
    """Everything the filter produced, plus the model it ran on.

    For structured runs ``A`` is ``None`` (identity), and ``Q``/``P0`` are
    the scalar variances of the isotropic model.
    """

    steps: list
    alpha: float
    L: np.ndarray
    R: np.ndarray
    A: object
    Q: object
    P0: object
    structured: bool = False
    basis: np.ndarray = field(default=None, repr=False)

    @property
    def n_steps(self):
        return len(self.steps)

    def filtered_means(self):
        return np.array([s.filtered.mean for s in self.steps])

    def standardized(self):
        return np.array([s.standardized for s in self.steps])

    def restandardize(self, alpha):
        """Standardized series at another exponent (the recursion is unchanged)."""
        return np.array([
            standardize(s.filtered.mean, s.pred_inv_sqrt, weights_from_diagonal(s.std_diag, alpha))
            for s in self.steps
        ])

    def diagnostics(self):
        """Rows of (step, trace of filtered P, max weight, innovation norm)."""
        return [
            (t, float(s.filtered.variances().sum()), float(s.weights.max()), s.innovation_norm)
            for t, s in enumerate(self.steps)
        ]


def predict(prev, A, Q):
    """Propagate a belief through ``x' = A x + q``, ``q ~ N(0, Q)``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    P = np.atleast_2d(np.asarray(prev.cov, dtype=float))
    n = P.shape[0]
    if A.shape != (n, n) or Q.shape != (n, n) or np.shape(prev.mean) != (n,):
        raise ValueError(
            f"dimension mismatch: mean {np.shape(prev.mean)}, P {P.shape}, A {A.shape}, Q {Q.shape}"
        )
    return GaussianBelief(mean=A @ prev.mean, cov=symmetrize(A @ P @ A.T + Q))


def update(pred, L, R, y, step=None):
    """Condition a predicted belief on ``y = L x + r``, ``r ~ N(0, R)``.

    Returns ``(filtered, gain, innovation_cov)``.
    """
    L = np.atleast_2d(np.asarray(L, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    P = np.atleast_2d(np.asarray(pred.cov, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    m, n = L.shape
    if P.shape != (n, n) or R.shape != (m, m) or y.shape != (m,):
        raise ValueError(
            f"dimension mismatch: L {L.shape}, P {P.shape}, R {R.shape}, y {y.shape}"
        )
    LP = L @ P
    S = symmetrize(LP @ L.T + R)
    fac = spd_factor(S, step=step, what="innovation covariance")
    Kt = cho_solve(fac, LP, check_finite=False)  # S^{-1} L P = K^T
    K = Kt.T
    innov = y - L @ pred.mean
    mean = pred.mean + K @ innov
    cov = symmetrize(P - K @ LP)
    return GaussianBelief(mean=mean, cov=cov), K, S


def standardization_diagonal(P_inv_sqrt, K, S):
    """``diag(P^{-1/2} K S K^T P^{-1/2})`` without forming the n x n product."""
    B = P_inv_sqrt @ K
    return np.einsum("ij,ij->i", B @ S, B)


def weights_from_diagonal(d, alpha, step=None):
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    d = np.asarray(d, dtype=float)
    if not np.any(d > 0):
        raise NumericalFailure("standardization diagonal is identically zero", step=step)
    return np.maximum(d, WEIGHT_FLOOR) ** (-alpha)


def standardization_weights(P_inv_sqrt, K, S, alpha):
    """Diagonal of the standardization matrix ``W(alpha)``."""
    return weights_from_diagonal(standardization_diagonal(P_inv_sqrt, K, S), alpha)


def standardize(filtered_mean, P_inv_sqrt, weights):
    return weights * (P_inv_sqrt @ filtered_mean)


def _finish_step(pred, filt, K, S, innov_norm, alpha, t):
    Pis = sym_inv_sqrt(pred.cov, step=t)
    d = standardization_diagonal(Pis, K, S)
    w = weights_from_diagonal(d, alpha, step=t)
    return StepRecord(predicted=pred, filtered=filt, gain=K, innovation_cov=S,
                      pred_inv_sqrt=Pis, std_diag=d, weights=w,
                      standardized=standardize(filt.mean, Pis, w),
                      innovation_norm=innov_norm)


def kalman_filter(ys, L, A, Q, R, P0, alpha, m0=None):
    """Dense standardized Kalman filter over measurement columns ``ys`` (m, K)."""
    ys = np.asarray(ys, dtype=float)
    L = np.asarray(L, dtype=float)
    n = L.shape[1]
    belief = GaussianBelief(np.zeros(n) if m0 is None else np.asarray(m0, dtype=float),
                            np.asarray(P0, dtype=float))
    steps = []
    for t in range(ys.shape[1]):
        pred = predict(belief, A, Q)
        filt, K, S = update(pred, L, R, ys[:, t], step=t)
        innov_norm = float(np.linalg.norm(ys[:, t] - L @ pred.mean))
        steps.append(_finish_step(pred, filt, K, S, innov_norm, alpha, t))
        belief = filt
    return FilterTrajectory(steps=steps, alpha=alpha, L=L, R=np.asarray(R, dtype=float),
                            A=np.asarray(A, dtype=float), Q=np.asarray(Q, dtype=float),
                            P0=np.asarray(P0, dtype=float))


def lead_subspace(L):
    """Orthonormal basis (n, m) containing the row space of ``L``."""
    _, _, Vt = np.linalg.svd(L, full_matrices=False)
    return np.ascontiguousarray(Vt.T)


def _update_subspace(pred, L, LV, R, y, step):
    cov = pred.cov
    D = cov.block
    LVD = LV @ D                          # (m, r) = L P V
    S = symmetrize(LVD @ LV.T + R)
    fac = spd_factor(S, step=step, what="innovation covariance")
    Kr = cho_solve(fac, LVD, check_finite=False).T  # (r, m) = V^T K
    K = cov.basis @ Kr
    innov = y - L @ pred.mean
    mean = pred.mean + K @ innov
    block = symmetrize(D - Kr @ LVD)
    return GaussianBelief(mean, SubspaceMatrix(cov.perp, block, cov.basis)), K, S, innov


def _filter_subspace(ys, L, R, theta0, tau_sq, alpha):
    n = L.shape[1]
    V = lead_subspace(L)
    LV = L @ V
    r = V.shape[1]
    belief = GaussianBelief(np.zeros(n), SubspaceMatrix(theta0, theta0 * np.eye(r), V))
    steps = []
    for t in range(ys.shape[1]):
        pred = GaussianBelief(belief.mean.copy(), belief.cov.shift(tau_sq))
        filt, K, S, innov = _update_subspace(pred, L, LV, R, ys[:, t], t)
        steps.append(_finish_step(pred, filt, K, S, float(np.linalg.norm(innov)), alpha, t))
        belief = filt
    return FilterTrajectory(steps=steps, alpha=alpha, L=L, R=R, A=None, Q=tau_sq,
                            P0=theta0, structured=True, basis=V)


def run_filter(lead, prior, measurements, alpha, unit_scale=1e-9, method="auto"):
    """Filter a :class:`~skfeeg.signals.MeasurementSet` under a random-walk prior.

    Parameters
    ----------
    lead : LeadField
    prior : PriorSpec
    measurements : MeasurementSet
        ``noisy`` is filtered; ``R = noise_std**2 * I``.
    alpha : float
        Standardization exponent.
    unit_scale : float
        A*m per state unit (default nA*m).
    method : {"auto", "subspace", "dense"}
        "auto" uses the subspace path, which is exact for this model.
    """
    L = lead.scaled(unit_scale)
    m, n = L.shape
    if n != 3 * prior.n_sources:
        raise ValueError(f"lead field has {n} columns, prior expects {3 * prior.n_sources}")
    ys = measurements.noisy
    if ys.shape[0] != m or ys.shape[1] < 1:
        raise ValueError(f"measurements of shape {ys.shape} do not fit {m} electrodes")
    R = measurements.noise_std ** 2 * np.eye(m)
    if method in ("auto", "subspace"):
        return _filter_subspace(ys, L, R, prior.theta0, prior.tau_i_sq, alpha)
    if method == "dense":
        eye = np.eye(n)
        return kalman_filter(ys, L, eye, prior.tau_i_sq * eye, R, prior.theta0 * eye, alpha)
    raise ValueError(f"unknown method {method!r}")

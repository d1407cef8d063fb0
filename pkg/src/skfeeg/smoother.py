"""Rauch-Tung-Striebel fixed-interval smoothing of a filter trajectory.

The backward pass recomputes each one-step prediction from the stored
filtered belief instead of keeping predictions around twice. Smoothed
means are standardized with the same per-step operator as the filter,

    z_t^s = W_t(alpha) P_{t|t-1}^{-1/2} x_t^s,

by default reusing the filter-pass weights. ``weights_from="smoothed"``
instead builds the diagonal from ``P_{t|t-1} - P_t^s``, the smoothed
analogue of ``K S K^T``; it is provided for comparison only.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve

from .kalman import standardize, weights_from_diagonal
from .linalg import SubspaceMatrix, spd_factor, symmetrize

__all__ = ["SmoothedTrajectory", "rts_backward", "standardize_smoothed", "smooth"]


@dataclass
class SmoothedTrajectory:
    means: list
    covs: list
    gains: list          # K - 1 entries; gains[t] links step t to t + 1
    standardized: list = None

    @property
    def n_steps(self):
        return len(self.means)


def _backward_dense(traj):
    A = traj.A
    Q = traj.Q
    K = traj.n_steps
    last = traj.steps[-1].filtered
    means = [None] * K
    covs = [None] * K
    gains = [None] * (K - 1)
    means[-1] = last.mean
    covs[-1] = last.cov
    for t in range(K - 2, -1, -1):
        f = traj.steps[t].filtered
        x_pred = A @ f.mean
        AP = A @ f.cov
        P_pred = symmetrize(AP @ A.T + Q)
        fac = spd_factor(P_pred, step=t, what="predicted covariance")
        G = cho_solve(fac, AP, check_finite=False).T
        means[t] = f.mean + G @ (means[t + 1] - x_pred)
        covs[t] = symmetrize(f.cov + G @ (covs[t + 1] - P_pred) @ G.T)
        gains[t] = G
    return SmoothedTrajectory(means=means, covs=covs, gains=gains)


def _backward_subspace(traj):
    tau_sq = traj.Q
    K = traj.n_steps
    last = traj.steps[-1].filtered
    means = [None] * K
    covs = [None] * K
    gains = [None] * (K - 1)
    means[-1] = last.mean
    covs[-1] = last.cov
    for t in range(K - 2, -1, -1):
        f = traj.steps[t].filtered
        P = f.cov
        P_pred = P.shift(tau_sq)
        fac = spd_factor(P_pred.block, step=t, what="predicted covariance")
        G = SubspaceMatrix(P.perp / P_pred.perp,
                           cho_solve(fac, P.block, check_finite=False).T, P.basis)
        means[t] = f.mean + G @ (means[t + 1] - f.mean)
        diff = covs[t + 1] - P_pred
        covs[t] = SubspaceMatrix(
            P.perp + G.perp ** 2 * diff.perp,
            symmetrize(P.block + G.block @ diff.block @ G.block.T),
            P.basis,
        )
        gains[t] = G
    return SmoothedTrajectory(means=means, covs=covs, gains=gains)


def rts_backward(traj):
    """Smoothed means, covariances and gains for a complete trajectory."""
    if traj.n_steps < 1:
        raise ValueError("empty trajectory")
    if traj.structured:
        return _backward_subspace(traj)
    return _backward_dense(traj)


def _smoothed_diagonal(step, cov_s):
    Pis = step.pred_inv_sqrt
    if isinstance(Pis, SubspaceMatrix):
        return (Pis @ (step.predicted.cov - cov_s) @ Pis).diagonal()
    Pis = np.asarray(Pis)
    return np.diag(Pis @ (np.asarray(step.predicted.cov) - np.asarray(cov_s)) @ Pis).copy()


def standardize_smoothed(smoothed, traj, alpha, weights_from="filter"):
    """Standardized smoothed series, one n-vector per step."""
    if smoothed.n_steps != traj.n_steps:
        raise ValueError(
            f"smoothed has {smoothed.n_steps} steps, trajectory has {traj.n_steps}"
        )
    out = []
    for t, (step, x_s) in enumerate(zip(traj.steps, smoothed.means)):
        if weights_from == "filter":
            d = step.std_diag
        elif weights_from == "smoothed":
            d = _smoothed_diagonal(step, smoothed.covs[t])
        else:
            raise ValueError(f"unknown weights_from {weights_from!r}")
        w = weights_from_diagonal(d, alpha, step=t)
        out.append(standardize(x_s, step.pred_inv_sqrt, w))
    return out


def smooth(traj, alpha=None, weights_from="filter"):
    """Backward pass plus standardization at ``alpha`` (default: the filter's)."""
    sm = rts_backward(traj)
    sm.standardized = standardize_smoothed(
        sm, traj, traj.alpha if alpha is None else alpha, weights_from=weights_from
    )
    return sm

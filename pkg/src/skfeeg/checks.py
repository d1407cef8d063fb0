"""Small-instance oracle suites, runnable from the command line."""

import numpy as np

from .kalman import GaussianBelief, kalman_filter, standardization_diagonal, update, weights_from_diagonal
from .linalg import sym_inv_sqrt
from .oracles import (batch_map_trajectory, information_form_posterior, random_chain_instance,
                      random_spd, random_update_instance, rel_err)
from .smoother import rts_backward

__all__ = ["check_update", "check_smoother", "check_standardization", "run_all"]


def check_update(seed=0, n_instances=100, tol=1e-8):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        inst = random_update_instance(rng)
        filt, _, _ = update(GaussianBelief(inst["mean"], inst["P"]), inst["L"], inst["R"], inst["y"])
        mean, cov = information_form_posterior(**inst)
        worst = max(worst, rel_err(filt.mean, mean), rel_err(filt.cov, cov))
    return worst <= tol, worst


def check_smoother(seed=1, n_instances=50, tol=1e-6):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        c = random_chain_instance(rng)
        traj = kalman_filter(c["ys"], c["L"], c["A"], c["Q"], c["R"], c["P0"], 0.5, m0=c["m0"])
        sm = rts_backward(traj)
        ref = batch_map_trajectory(c["ys"], c["L"], c["A"], c["Q"], c["R"], c["P0"], c["m0"])
        worst = max(worst, rel_err(np.array(sm.means), ref))
    return worst <= tol, worst


def check_standardization(seed=2, n_instances=100, tol_diag=1e-8, tol_pow=1e-10):
    """Diagonal identity and exponent consistency; returns (ok, worst_diag, worst_pow)."""
    rng = np.random.default_rng(seed)
    worst_diag = worst_pow = 0.0
    for _ in range(n_instances):
        n = int(rng.integers(1, 21))
        m = int(rng.integers(1, 9))
        P = random_spd(rng, n)
        L = rng.standard_normal((m, n))
        R = random_spd(rng, m)
        S = L @ P @ L.T + R
        K = P @ L.T @ np.linalg.inv(S)
        Pis = sym_inv_sqrt(P)
        d = standardization_diagonal(Pis, K, S)
        vals, vecs = np.linalg.eigh(P)
        Ph = (vecs * np.sqrt(vals)) @ vecs.T
        ref = np.diag(Ph @ L.T @ np.linalg.inv(S) @ L @ Ph)
        worst_diag = max(worst_diag, rel_err(d, ref))
        w05 = weights_from_diagonal(d, 0.5)
        for a in (0.75, 1.0, 1.25, 1.5):
            worst_pow = max(worst_pow, rel_err(weights_from_diagonal(d, a), w05 ** (2 * a)))
    return worst_diag <= tol_diag and worst_pow <= tol_pow, worst_diag, worst_pow


def run_all(seed=0):
    """List of (name, passed, detail) lines."""
    ok_u, e_u = check_update(seed)
    ok_s, e_s = check_smoother(seed + 1)
    ok_w, e_d, e_p = check_standardization(seed + 2)
    return [
        ("update vs information form (100 instances)", ok_u, f"max rel err {e_u:.2e}"),
        ("RTS vs batch MAP (50 instances)", ok_s, f"max rel err {e_s:.2e}"),
        ("standardization identities (100 instances)", ok_w,
         f"diag rel err {e_d:.2e}, exponent rel err {e_p:.2e}"),
    ]

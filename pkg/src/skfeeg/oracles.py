"""Independent reference computations for checking the recursions.

Nothing here calls into :mod:`skfeeg.kalman` or :mod:`skfeeg.smoother`:
the posterior is computed in information form with explicit inverses,
and the smoother is checked against a single joint solve of the
block-tridiagonal normal equations over the whole interval.
"""

import numpy as np

__all__ = [
    "random_spd",
    "information_form_posterior",
    "batch_map_trajectory",
    "random_update_instance",
    "random_chain_instance",
    "rel_err",
]


def random_spd(rng, n, cond=1e3):
    Qm, _ = np.linalg.qr(rng.standard_normal((n, n)))
    vals = np.exp(rng.uniform(0.0, np.log(cond), n))
    return (Qm * vals) @ Qm.T


def rel_err(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), np.finfo(float).tiny))


def information_form_posterior(mean, P, L, R, y):
    """Posterior ``(P^-1 + L^T R^-1 L)^-1`` and its mean."""
    Rinv = np.linalg.inv(R)
    cov = np.linalg.inv(np.linalg.inv(P) + L.T @ Rinv @ L)
    cov = 0.5 * (cov + cov.T)
    return mean + cov @ L.T @ Rinv @ (y - L @ mean), cov


def batch_map_trajectory(ys, L, A, Q, R, P0, m0=None):
    """Joint MAP of x_1..x_K for the linear-Gaussian chain.

    ``x_1 ~ N(A m0, A P0 A^T + Q)``, ``x_{t+1} | x_t ~ N(A x_t, Q)``,
    ``y_t | x_t ~ N(L x_t, R)``. Returns a (K, n) array.
    """
    ys = np.asarray(ys, dtype=float)
    n = L.shape[1]
    K = ys.shape[1]
    m0 = np.zeros(n) if m0 is None else m0
    P1 = A @ P0 @ A.T + Q
    P1i = np.linalg.inv(P1)
    Qi = np.linalg.inv(Q)
    Ri = np.linalg.inv(R)
    H = np.zeros((K * n, K * n))
    b = np.zeros(K * n)

    def blk(i, j):
        return slice(i * n, (i + 1) * n), slice(j * n, (j + 1) * n)

    H[blk(0, 0)] += P1i
    b[:n] += P1i @ (A @ m0)
    for t in range(K):
        H[blk(t, t)] += L.T @ Ri @ L
        b[t * n:(t + 1) * n] += L.T @ Ri @ ys[:, t]
    for t in range(K - 1):
        H[blk(t, t)] += A.T @ Qi @ A
        H[blk(t + 1, t + 1)] += Qi
        H[blk(t, t + 1)] -= A.T @ Qi
        H[blk(t + 1, t)] -= Qi @ A
    return np.linalg.solve(H, b).reshape(K, n)


def random_update_instance(rng, n_max=20, m_max=8):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    return dict(
        mean=rng.standard_normal(n),
        P=random_spd(rng, n),
        L=rng.standard_normal((m, n)),
        R=random_spd(rng, m),
        y=rng.standard_normal(m),
    )


def random_chain_instance(rng, n_max=10, K_max=6, m_max=8):
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    K = int(rng.integers(1, K_max + 1))
    A = np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n)
    return dict(
        ys=rng.standard_normal((m, K)),
        L=rng.standard_normal((m, n)),
        A=A,
        Q=random_spd(rng, n, cond=1e2),
        R=random_spd(rng, m, cond=1e2),
        P0=random_spd(rng, n, cond=1e2),
        m0=rng.standard_normal(n),
    )

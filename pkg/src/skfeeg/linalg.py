"""Dense and subspace-structured linear algebra used by the filter.

With an identity transition, isotropic initial covariance and isotropic
process noise, every covariance the filter and smoother produce has the form

    perp * (I - V V^T) + V B V^T

where the columns of ``V`` span the row space of the lead field. The
:class:`SubspaceMatrix` type stores only ``perp``, ``B`` (r x r) and the
shared basis ``V`` (n x r), so per-step cost scales with n r^2 instead
of n^3.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import NumericalFailure

__all__ = [
    "SubspaceMatrix",
    "symmetrize",
    "spd_factor",
    "spd_solve",
    "sym_inv_sqrt",
    "JITTER_REL",
    "EIG_FLOOR_REL",
]

JITTER_REL = 1e-12
EIG_FLOOR_REL = 1e-12


def symmetrize(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SubspaceMatrix:
    """``perp * (I - V V^T) + V @ block @ V^T`` with orthonormal ``V``.

    ``block`` need not be symmetric (smoother gains are not), but every
    covariance built by the package is.
    """

    perp: float
    block: np.ndarray
    basis: np.ndarray

    @property
    def shape(self):
        n = self.basis.shape[0]
        return (n, n)

    @property
    def T(self):
        return SubspaceMatrix(self.perp, self.block.T, self.basis)

    def __matmul__(self, x):
        if isinstance(x, SubspaceMatrix):
            self._check_basis(x)
            return SubspaceMatrix(self.perp * x.perp, self.block @ x.block, self.basis)
        x = np.asarray(x)
        c = self.basis.T @ x
        return self.perp * (x - self.basis @ c) + self.basis @ (self.block @ c)

    def __add__(self, other):
        self._check_basis(other)
        return SubspaceMatrix(self.perp + other.perp, self.block + other.block, self.basis)

    def __sub__(self, other):
        self._check_basis(other)
        return SubspaceMatrix(self.perp - other.perp, self.block - other.block, self.basis)

    def _check_basis(self, other):
        if other.basis is not self.basis:
            raise ValueError("SubspaceMatrix operands must share the same basis object")

    def shift(self, c):
        """Return ``self + c * I``."""
        r = self.block.shape[0]
        return SubspaceMatrix(self.perp + c, self.block + c * np.eye(r), self.basis)

    def diagonal(self):
        V = self.basis
        inside = np.einsum("ij,ij->i", V @ self.block, V)
        return self.perp * (1.0 - np.einsum("ij,ij->i", V, V)) + inside

    def eigvalsh(self):
        """Distinct spectrum: ``perp`` (if the complement is nontrivial) and the block's."""
        vals = np.linalg.eigvalsh(symmetrize(self.block))
        n, r = self.basis.shape
        if n > r:
            vals = np.append(vals, self.perp)
        return np.sort(vals)

    def to_dense(self):
        V = self.basis
        n = V.shape[0]
        return self.perp * (np.eye(n) - V @ V.T) + V @ self.block @ V.T

    def __array__(self, dtype=None, copy=None):
        out = self.to_dense()
        return out if dtype is None else out.astype(dtype)


def spd_factor(M, step=None, what="matrix"):
    """Cholesky factor of a symmetric positive definite matrix.

    One retry adds ``JITTER_REL * trace(M) / dim`` to the diagonal before
    giving up with :class:`NumericalFailure`.
    """
    try:
        return sla.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        pass
    dim = M.shape[0]
    jitter = JITTER_REL * np.trace(M) / dim
    if not (np.isfinite(jitter) and jitter > 0):
        raise NumericalFailure(f"{what} is not positive definite", step=step)
    try:
        return sla.cho_factor(M + jitter * np.eye(dim), lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        raise NumericalFailure(f"{what} is not positive definite after jitter", step=step) from None


def spd_solve(M, B, step=None, what="matrix"):
    """Solve ``M X = B`` for SPD ``M`` via Cholesky (never an explicit inverse)."""
    return sla.cho_solve(spd_factor(M, step=step, what=what), B, check_finite=False)


def _inv_sqrt_eig(vals, vecs, eps_rel, step):
    top = vals.max()
    if not top > 0:
        raise NumericalFailure("largest eigenvalue is not positive", step=step)
    clamped = np.maximum(vals, eps_rel * top)
    return (vecs / np.sqrt(clamped)) @ vecs.T, eps_rel * top


def sym_inv_sqrt(M, eps_rel=EIG_FLOOR_REL, step=None):
    """Symmetric inverse square root via eigendecomposition.

    Eigenvalues below ``eps_rel * lambda_max`` are raised to that floor.
    Accepts a dense array or a :class:`SubspaceMatrix`; the result has the
    same representation.
    """
    if isinstance(M, SubspaceMatrix):
        vals, vecs = np.linalg.eigh(symmetrize(M.block))
        n, r = M.basis.shape
        top = max(vals.max(), M.perp) if n > r else vals.max()
        if not top > 0:
            raise NumericalFailure("largest eigenvalue is not positive", step=step)
        floor = eps_rel * top
        clamped = np.maximum(vals, floor)
        block = (vecs / np.sqrt(clamped)) @ vecs.T
        return SubspaceMatrix(1.0 / np.sqrt(max(M.perp, floor)), block, M.basis)
    M = np.asarray(M, dtype=float)
    vals, vecs = np.linalg.eigh(symmetrize(M))
    out, _ = _inv_sqrt_eig(vals, vecs, eps_rel, step)
    return symmetrize(out)

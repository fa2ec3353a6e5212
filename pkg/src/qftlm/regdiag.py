"""Regularized diagonalization of noisy Krylov matrices.

Pipeline: Tikhonov shift of the Gram matrix, Loewdin orthonormalization,
singular-value truncation, projection to the nearest unitary, and a Schur
eigendecomposition with back-transformation to the full Krylov basis.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

logger = logging.getLogger(__name__)

BRANCH_CUT_TOL = 1e-6


class RegularizationError(ArithmeticError):
    """The regularized problem has no usable subspace."""


@dataclass(frozen=True)
class RegularizationParams:
    eta: float = 1e-12
    mu: float = 0.9

    def __post_init__(self):
        if not (self.eta >= 0 and np.isfinite(self.eta)):
            raise ValueError(f"eta must be a finite non-negative number, got {self.eta}")
        if not (self.mu >= 0 and np.isfinite(self.mu)):
            raise ValueError(f"mu must be a finite non-negative number, got {self.mu}")


@dataclass(frozen=True)
class KrylovDecomposition:
    """Eigenphases and back-transformed eigenvectors of the regularized unitary.

    ``vectors`` is ``D x r``; columns of ``basis`` (``P``) span the retained
    subspace of the orthonormalized Krylov space.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    sqrt_S: np.ndarray
    inv_sqrt_S: np.ndarray
    basis: np.ndarray
    unitary: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def rank(self):
        return len(self.eigenvalues)

    @property
    def dim(self):
        return self.sqrt_S.shape[0]

    @property
    def center(self):
        return (self.dim - 1) // 2


def _hermitian_part(S):
    S = np.asarray(S, dtype=complex)
    return 0.5 * (S + S.conj().T)


def inv_sqrt(S, eta):
    """Return ``(S^-1/2, S^1/2, n_clamped)`` with eigenvalues clamped to ``>= eta``."""
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    w, v = np.linalg.eigh(_hermitian_part(S))
    clamped = w < eta
    w = np.where(clamped, eta, w)
    if np.any(w <= 0):
        raise RegularizationError("Gram matrix is singular and eta = 0")
    root = np.sqrt(w)
    vh = v.conj().T
    return (v / root) @ vh, (v * root) @ vh, int(np.count_nonzero(clamped))


def nearest_unitary(M):
    """Frobenius-nearest unitary ``W R^H`` from the SVD ``M = W D R^H``."""
    M = np.asarray(M)
    W, sv, Rh = np.linalg.svd(M)
    if sv.size == 0 or sv[-1] <= sv[0] * M.shape[0] * np.finfo(float).eps:
        raise RegularizationError("matrix is rank deficient; nearest unitary is not unique")
    return W @ Rh


def regularized_diagonalization(S_noisy, U_noisy, params=None):
    params = params or RegularizationParams()
    S_noisy = np.asarray(S_noisy, dtype=complex)
    U_noisy = np.asarray(U_noisy, dtype=complex)
    if S_noisy.ndim != 2 or S_noisy.shape[0] != S_noisy.shape[1] or S_noisy.shape != U_noisy.shape:
        raise ValueError(f"S and U must be square and equal in shape, got {S_noisy.shape}, {U_noisy.shape}")

    S = _hermitian_part(S_noisy) + params.eta * np.eye(S_noisy.shape[0])
    S_inv_half, S_half, n_clamped = inv_sqrt(S, params.eta)
    U_orth = S_inv_half @ U_noisy @ S_inv_half

    P_full, sv, _ = np.linalg.svd(U_orth)
    keep = sv > params.mu
    if not np.any(keep):
        raise RegularizationError(
            f"all singular values are <= mu={params.mu} (largest {sv.max():.3g})"
        )
    P = P_full[:, keep]
    U_trunc = P.conj().T @ U_orth @ P
    U_tilde = nearest_unitary(U_trunc)

    # Schur form of a normal matrix is diagonal with unitary Z, which also
    # keeps degenerate eigenvectors orthonormal
    T, Z = scipy.linalg.schur(U_tilde, output="complex")
    lam = np.diag(T).copy()
    lam /= np.abs(lam)
    V = P @ Z

    near_cut = int(np.count_nonzero(np.abs(np.abs(np.angle(lam)) - np.pi) < BRANCH_CUT_TOL))
    diagnostics = {
        "dim": S.shape[0],
        "rank": int(keep.sum()),
        "clamped": n_clamped,
        "kept_sv": sv[keep],
        "dropped_sv": sv[~keep],
        "near_branch_cut": near_cut,
    }
    if near_cut:
        logger.warning("%d eigenphases lie within %g of the branch cut", near_cut, BRANCH_CUT_TOL)
    return KrylovDecomposition(lam, V, S_half, S_inv_half, P, U_tilde, diagnostics)


def format_diagnostics(diag, k=None):
    """One stable log line summarising a decomposition."""
    dropped = ",".join(f"{x:.6e}" for x in diag["dropped_sv"])
    prefix = "regdiag" if k is None else f"regdiag k={k}"
    return (
        f"{prefix} D={diag['dim']} r={diag['rank']} clamped={diag['clamped']} "
        f"near_cut={diag['near_branch_cut']} dropped=[{dropped}]"
    )

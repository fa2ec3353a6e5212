import numpy as np
import pytest
from scipy.stats import unitary_group

from qftlm.hamiltonian import build_tfim
from qftlm.krylov import assemble, compute_overlaps, default_time_step
from qftlm.oracle import exact_spectrum
from qftlm.regdiag import (
    RegularizationError,
    RegularizationParams,
    format_diagnostics,
    inv_sqrt,
    nearest_unitary,
    regularized_diagonalization,
)
from qftlm.thermal import extract_energies

from conftest import random_state


def test_scalar_case():
    theta = 0.4
    dec = regularized_diagonalization([[1.0]], [[np.exp(-1j * theta)]], RegularizationParams(0.0, 0.5))
    assert np.allclose(dec.eigenvalues, [np.exp(-1j * theta)])
    assert np.allclose(np.abs(dec.vectors), [[1.0]])
    assert dec.rank == 1


def test_inv_sqrt_identity():
    for eta in (0.0, 1e-6, 1.0):
        a, b, n = inv_sqrt(np.eye(4), eta)
        assert np.allclose(a, np.eye(4)) and np.allclose(b, np.eye(4)) and n == 0


def test_inv_sqrt_clamps():
    a, b, n = inv_sqrt(np.diag([4.0, 1e-12]), 1e-6)
    assert np.allclose(a, np.diag([0.5, 1e3]), rtol=1e-12)
    assert n == 1
    assert np.allclose(b @ b, np.diag([4.0, 1e-6]), atol=1e-10)


def test_inv_sqrt_singular_without_shift():
    with pytest.raises(RegularizationError):
        inv_sqrt(np.diag([1.0, 0.0]), 0.0)


def test_inv_sqrt_symmetrizes(rng):
    X = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    S = X @ X.conj().T
    S_noisy = S + 1e-9 * rng.normal(size=(5, 5))
    a, b, _ = inv_sqrt(S_noisy, 0.0)
    assert np.allclose(a, a.conj().T) and np.allclose(b, b.conj().T)
    assert np.allclose(a @ b, np.eye(5), atol=1e-8)


def test_nearest_unitary_fixed_point():
    Q = unitary_group.rvs(6, random_state=2)
    assert np.allclose(nearest_unitary(Q), Q, atol=1e-12)


def test_nearest_unitary_positive_diagonal():
    assert np.allclose(nearest_unitary(np.diag([2.0, 0.5])), np.eye(2))


def test_nearest_unitary_rank_deficient():
    with pytest.raises(RegularizationError):
        nearest_unitary(np.diag([1.0, 0.0]))


def test_nearest_unitary_is_optimal(rng):
    for D in (2, 5, 8):
        M = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
        W = nearest_unitary(M)
        best = np.linalg.norm(W - M)
        for Q in unitary_group.rvs(D, size=100, random_state=rng.integers(1 << 31)):
            assert best <= np.linalg.norm(Q - M) + 1e-12


def test_recovers_tfim_spectrum():
    H = build_tfim(4)
    spec = exact_spectrum(H)
    psi = random_state(np.random.default_rng(3), 4)
    dt = default_time_step(H)
    pair = assemble(compute_overlaps(psi, H, dt, 8))  # D = 17
    dec = regularized_diagonalization(pair.S, pair.U, RegularizationParams(1e-12, 0.9))
    E = np.sort(extract_energies(dec.eigenvalues, dt))
    # a single seed state spans one vector per distinct level
    present = np.unique(np.round(spec.energies[spec.weights(psi) > 1e-12], 9))
    assert len(E) == len(present)
    assert np.allclose(E, present, atol=1e-8)


def test_synthetic_eigenphases(rng):
    D = 7
    while True:
        X = rng.normal(size=(D, D)) + 1j * rng.normal(size=(D, D))
        if 1 / np.linalg.cond(X) >= 1e-3:
            break
    theta = np.sort(rng.uniform(-3, 3, size=D))
    U = X @ np.diag(np.exp(-1j * theta)) @ X.conj().T
    S = X @ X.conj().T
    dec = regularized_diagonalization(S, U, RegularizationParams(1e-12, 0.5))
    got = np.sort(-np.angle(dec.eigenvalues))
    assert np.allclose(got, theta, atol=1e-6)


def test_eigenvectors_orthonormal_and_unitary(rng):
    H = build_tfim(5)
    pair = assemble(compute_overlaps(random_state(rng, 5), H, default_time_step(H), 10))
    dec = regularized_diagonalization(pair.S, pair.U)
    Vp = dec.basis.conj().T @ dec.vectors
    assert np.allclose(Vp.conj().T @ Vp, np.eye(dec.rank), atol=1e-8)
    assert np.allclose(dec.unitary.conj().T @ dec.unitary, np.eye(dec.rank), atol=1e-10)
    assert np.allclose(np.abs(dec.eigenvalues), 1, atol=1e-10)


def test_rank_non_increasing_in_mu(rng):
    H = build_tfim(5)
    pair = assemble(compute_overlaps(random_state(rng, 5), H, default_time_step(H), 10))
    S = pair.S + 1e-6 * rng.normal(size=pair.S.shape)
    ranks = []
    for mu in (0.0, 0.3, 0.6, 0.9, 0.99, 0.999999):
        try:
            ranks.append(regularized_diagonalization(S, pair.U, RegularizationParams(1e-6, mu)).rank)
        except RegularizationError:
            ranks.append(0)
    assert all(a >= b for a, b in zip(ranks, ranks[1:]))


def test_empty_subspace():
    with pytest.raises(RegularizationError):
        regularized_diagonalization(np.eye(3), 0.1 * np.eye(3), RegularizationParams(0.0, 0.5))


def test_strict_threshold():
    # singular value exactly mu is dropped
    dec = regularized_diagonalization(np.eye(2), np.diag([1.0, 0.5]), RegularizationParams(0.0, 0.5))
    assert dec.rank == 1


def test_params_validation():
    with pytest.raises(ValueError):
        RegularizationParams(-1.0, 0.9)
    with pytest.raises(ValueError):
        RegularizationParams(0.0, float("nan"))
    with pytest.raises(ValueError):
        regularized_diagonalization(np.eye(2), np.eye(3))


def test_diagnostics_line():
    dec = regularized_diagonalization(np.eye(2), np.diag([1.0, 0.25]), RegularizationParams(0.0, 0.5))
    line = format_diagnostics(dec.diagnostics, k=3)
    assert line == "regdiag k=3 D=2 r=1 clamped=0 near_cut=0 dropped=[2.500000e-01]"

"""Dense statevectors: Hutchinson sampling, time evolution and overlaps.

States are plain complex numpy arrays of length ``2**L``. Evolution routines
return new arrays and never mutate their input.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .hamiltonian import PauliHamiltonian

_PURPOSES = {"state": 0, "noise": 1}


def random_source(seed, k=0, purpose="state", repetition=0):
    """Independent generator for one ``(seed, repetition, k, purpose)`` tuple.

    Streams are derived with ``SeedSequence`` spawn keys, so results do not
    depend on the order in which trace states are processed.
    """
    if purpose not in _PURPOSES:
        raise ValueError(f"unknown random purpose {purpose!r}")
    ss = np.random.SeedSequence(seed, spawn_key=(repetition, k, _PURPOSES[purpose]))
    return np.random.Generator(np.random.PCG64(ss))


def sample_hutchinson(L, rng):
    """Equal-weight state with independent uniform phases on every basis state."""
    if L < 1:
        raise ValueError("need at least one qubit")
    n = 2 ** L
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return np.exp(-1j * phases) / np.sqrt(n)


def basis_state(L, index):
    psi = np.zeros(2 ** L, dtype=complex)
    psi[index] = 1.0
    return psi


def inner(a, b):
    """``<a|b>``, conjugate-linear in ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def _check_dim(psi, H):
    if psi.shape != (H.dim,):
        raise ValueError(f"state has shape {psi.shape}, expected ({H.dim},)")


@lru_cache(maxsize=32)
def _trotter_layers(H):
    zpart, xpart = H.split_layers()
    diag = zpart.diagonal
    xterms = []
    for coef, ps in xpart.terms:
        perm, _ = ps.action(H.dim)
        xterms.append((coef, perm))
    return diag, xterms


def _z_layer(psi, diag, theta):
    return psi * np.exp(-1j * theta * diag)


def _x_layer(psi, xterms, theta, reverse=False):
    for coef, perm in reversed(xterms) if reverse else xterms:
        a = coef * theta
        psi = np.cos(a) * psi - 1j * np.sin(a) * psi[perm]
    return psi


def trotter_step(psi, H: PauliHamiltonian, dt, sign=1):
    """One first-order product-formula step.

    ``sign=+1`` applies the Z-type layer then the X-type layer. ``sign=-1``
    applies the exact adjoint (X-type first, negated angles), so a forward
    step followed by a backward step is the identity.
    """
    psi = np.asarray(psi, dtype=complex)
    _check_dim(psi, H)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    diag, xterms = _trotter_layers(H)
    theta = sign * dt
    if sign == 1:
        return _x_layer(_z_layer(psi, diag, theta), xterms, theta)
    # X-type terms commute, so their order inside the layer is immaterial
    return _z_layer(_x_layer(psi, xterms, theta, reverse=True), diag, theta)


def evolve_trotter(psi, H, dt, n_steps, j=1):
    """Apply the ``n_steps``-step circuit for one time step ``dt``, ``|j|`` times."""
    if n_steps < 1:
        raise ValueError("need at least one Trotter step")
    psi = np.asarray(psi, dtype=complex)
    _check_dim(psi, H)
    sign = 1 if j >= 0 else -1
    delta = dt / n_steps
    for _ in range(abs(j) * n_steps):
        psi = trotter_step(psi, H, delta, sign)
    return psi


def evolve_exact(psi, spectrum, t):
    """``exp(-iHt) psi`` through a dense eigendecomposition."""
    psi = np.asarray(psi, dtype=complex)
    vecs = spectrum.vectors
    if psi.shape != (vecs.shape[0],):
        raise ValueError(f"state has shape {psi.shape}, expected ({vecs.shape[0]},)")
    coeffs = vecs.conj().T @ psi
    return vecs @ (np.exp(-1j * spectrum.energies * t) * coeffs)

"""Exact-diagonalization reference values."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .hamiltonian import DENSE_LIMIT, PauliHamiltonian
from .thermal import ThermalCurve


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray  # ascending
    vectors: np.ndarray  # columns are eigenvectors

    @property
    def ground_energy(self):
        return float(self.energies[0])

    @property
    def spectral_norm(self):
        return float(np.max(np.abs(self.energies)))

    def weights(self, psi):
        """``|<v_j|psi>|^2`` for every eigenvector."""
        psi = np.asarray(psi)
        if psi.shape != (self.vectors.shape[0],):
            raise ValueError(
                f"state has shape {psi.shape}, expected ({self.vectors.shape[0]},)"
            )
        return np.abs(self.vectors.conj().T @ psi) ** 2


@lru_cache(maxsize=8)
def exact_spectrum(H: PauliHamiltonian, dense_limit=DENSE_LIMIT):
    """Dense Hermitian eigendecomposition of ``H`` (cached per Hamiltonian)."""
    mat = H.to_dense(dense_limit)
    if not np.any(mat.imag):
        mat = mat.real
    energies, vectors = np.linalg.eigh(mat)
    vectors = vectors.astype(complex)
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return Spectrum(energies, vectors)


def _boltzmann_sums(energies, weights, betas, shift):
    # rows: beta, columns: levels; shifted exponent never overflows
    boltz = np.exp(-np.outer(betas, energies - shift)) * weights
    z = boltz.sum(axis=1)
    h = boltz @ energies
    q = boltz @ energies ** 2
    return z, h, q


def exact_thermal_curve(spectrum, temperatures, H=None):
    """Exact energy and heat capacity on a temperature grid."""
    temps = np.asarray(temperatures, dtype=float)
    betas = 1.0 / temps
    energies = spectrum.energies
    shift = energies[0]
    z, h, _ = _boltzmann_sums(energies, np.full(energies.shape, 1.0 / len(energies)), betas, shift)
    energy = h / z
    # centred second moment avoids cancellation at large beta
    boltz = np.exp(-np.outer(betas, energies - shift)) / len(energies)
    var = np.sum(boltz * (energies[None, :] - energy[:, None]) ** 2, axis=1) / z
    heat = betas ** 2 * var
    metadata = {"source": "exact", "energy_shift": float(shift)}
    if H is not None:
        metadata["L"] = H.n_sites
    return ThermalCurve(
        temperatures=temps,
        energy=energy,
        heat_capacity=heat,
        partition=z.astype(complex),
        valid=z > 0,
        metadata=metadata,
    )


def exact_state_moment(psi, spectrum, beta, p=0):
    """``<psi| exp(-beta H) H^p |psi>`` from the exact spectrum."""
    if p not in (0, 1, 2):
        raise ValueError("power must be 0, 1 or 2")
    w = spectrum.weights(psi)
    e = spectrum.energies
    return float(np.sum(w * np.exp(-beta * e) * e ** p))

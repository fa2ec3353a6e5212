"""Thermal moments from Krylov decompositions and trace-estimator aggregation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CSV_HEADER = "T,beta,energy,heat_capacity,partition_real,partition_imag,valid"


def extract_energies(eigenvalues, dt):
    """``E = -arg(lambda) / dt`` with the phase taken in ``[-pi, pi)``."""
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    phase = np.angle(np.asarray(eigenvalues))
    phase = np.where(phase >= np.pi, phase - 2 * np.pi, phase)
    return -phase / dt


def _center_weights(dec):
    # moment = a^H diag(f) a with a = V^H S^1/2 e_c
    a = dec.vectors.conj().T @ dec.sqrt_S[:, dec.center]
    return np.abs(a) ** 2


def moment(dec, dt, beta, p=0, shift=0.0):
    """``<psi0| exp(-beta (H - shift)) H^p |psi0>`` in the Krylov subspace.

    ``shift`` rescales the Boltzmann factor to avoid under/overflow; choose
    the lowest recovered energy for large ``beta``. Ratios of moments taken
    with the same shift are unaffected.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if p not in (0, 1, 2):
        raise ValueError("power must be 0, 1 or 2")
    E = extract_energies(dec.eigenvalues, dt)
    w = _center_weights(dec)
    return complex(np.sum(w * np.exp(-beta * (E - shift)) * E ** p))


@dataclass
class StateMoments:
    """Moments of one trace state on a beta grid, all sharing ``shift``."""

    betas: np.ndarray
    z: np.ndarray
    h: np.ndarray
    q: np.ndarray
    shift: float = 0.0


def state_moments(dec, dt, betas, shift=0.0):
    """Vectorized ``moment`` for ``p = 0, 1, 2`` over a beta grid."""
    betas = np.asarray(betas, dtype=float)
    E = extract_energies(dec.eigenvalues, dt)
    w = _center_weights(dec)
    boltz = np.exp(-np.outer(betas, E - shift)) * w
    z = boltz.sum(axis=1).astype(complex)
    h = (boltz @ E).astype(complex)
    q = (boltz @ E ** 2).astype(complex)
    return StateMoments(betas, z, h, q, shift)


def observable_moment(dec, dt, beta, column, shift=0.0, inv_sqrt_S=None):
    """``<psi0| exp(-beta (H - shift)) Pi O |psi0>`` from a measured column.

    ``column[j + d] = <psi^j|O|psi^0>``.
    """
    column = np.asarray(column)
    if column.shape != (dec.dim,):
        raise ValueError(f"observable column has shape {column.shape}, expected ({dec.dim},)")
    S_inv_half = dec.inv_sqrt_S if inv_sqrt_S is None else inv_sqrt_S
    E = extract_energies(dec.eigenvalues, dt)
    left = dec.sqrt_S[dec.center, :] @ dec.vectors
    right = dec.vectors.conj().T @ (S_inv_half @ column)
    return complex(np.sum(left * np.exp(-beta * (E - shift)) * right))


@dataclass
class ThermalCurve:
    temperatures: np.ndarray
    energy: np.ndarray
    heat_capacity: np.ndarray
    partition: np.ndarray  # sum over trace states of z_k (shifted)
    valid: np.ndarray
    per_state: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def betas(self):
        return 1.0 / np.asarray(self.temperatures)

    def to_csv(self, path):
        with open(path, "w") as fh:
            for key, value in self.metadata.items():
                fh.write(f"# {key}={value}\n")
            fh.write(CSV_HEADER + "\n")
            for row in zip(self.temperatures, self.betas, self.energy, self.heat_capacity,
                           self.partition, self.valid):
                T, b, e, c, z, ok = row
                fh.write(
                    f"{T:.16e},{b:.16e},{e:.16e},{c:.16e},{z.real:.16e},{z.imag:.16e},{int(ok)}\n"
                )

    @classmethod
    def from_csv(cls, path):
        metadata = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    metadata[key] = value
                elif line and line != CSV_HEADER:
                    rows.append([float(x) for x in line.split(",")])
        data = np.array(rows).reshape(-1, 7)
        return cls(
            temperatures=data[:, 0],
            energy=data[:, 2],
            heat_capacity=data[:, 3],
            partition=data[:, 4] + 1j * data[:, 5],
            valid=data[:, 6].astype(bool),
            metadata=metadata,
        )


def aggregate(moments, temperatures, metadata=None):
    """Ratio-of-sums estimate of energy and heat capacity over trace states.

    Points whose aggregated partition estimate is not positive are flagged
    invalid and reported as NaN.
    """
    if not moments:
        raise ValueError("need at least one trace state")
    temps = np.asarray(temperatures, dtype=float)
    betas = 1.0 / temps
    shift = moments[0].shift
    for m in moments:
        if m.z.shape != betas.shape or not np.allclose(m.betas, betas, rtol=0, atol=0):
            raise ValueError("all state moments must share the temperature grid")
        if m.shift != shift:
            raise ValueError("all state moments must share the energy shift")
    # fixed summation order over k
    Z = np.zeros_like(moments[0].z)
    Hs = np.zeros_like(Z)
    Q = np.zeros_like(Z)
    for m in moments:
        Z = Z + m.z
        Hs = Hs + m.h
        Q = Q + m.q
    valid = Z.real > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        energy = Hs.real / Z.real
        second = Q.real / Z.real
        heat = betas ** 2 * (second - energy ** 2)
    energy = np.where(valid, energy, np.nan)
    heat = np.where(valid, heat, np.nan)
    meta = dict(metadata or {})
    meta.setdefault("energy_shift", float(shift))
    meta.setdefault("K", len(moments))
    return ThermalCurve(temps, energy, heat, Z, valid, list(moments), meta)

"""Real-time Krylov data: overlap sequences, Gram matrix and projected unitary.

The basis is ``|psi^j> = E^j |psi^0>`` for ``j = -d..d`` where ``E`` is one time
step of (exact or Trotterized) evolution. Because backward steps are exact
adjoints, ``<psi^i|psi^j> = <psi^0|E^(j-i)|psi^0>`` and all matrices follow
from the ``2d+2`` overlaps ``s_m``, ``m = 0..2d+1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hamiltonian import norm_bound
from .statevector import evolve_trotter

_DT_SLACK = 1e-12


@dataclass(frozen=True)
class Evolution:
    """Single-step evolution descriptor: ``exact`` or ``trotter`` with ``n_steps``."""

    kind: str = "exact"
    n_steps: int = 1

    def __post_init__(self):
        if self.kind not in ("exact", "trotter"):
            raise ValueError(f"unknown evolution kind {self.kind!r}")
        if self.kind == "trotter" and self.n_steps < 1:
            raise ValueError("Trotter evolution needs n_steps >= 1")

    @classmethod
    def trotter(cls, n_steps):
        return cls("trotter", int(n_steps))

    def __str__(self):
        return "exact" if self.kind == "exact" else f"trotter({self.n_steps})"


EXACT = Evolution()


def default_time_step(H, spectral_norm=None):
    """``pi / ||H||`` using the coefficient-sum bound unless an exact norm is given."""
    bound = norm_bound(H) if spectral_norm is None else float(spectral_norm)
    if bound <= 0:
        raise ValueError("cannot choose a time step for a Hamiltonian with zero norm")
    return np.pi / bound


def check_time_step(H, dt, spectrum=None):
    if not np.isfinite(dt) or dt <= 0:
        raise ValueError(f"time step must be positive and finite, got {dt}")
    bound = spectrum.spectral_norm if spectrum is not None else norm_bound(H)
    if bound > 0 and dt * bound > np.pi * (1 + _DT_SLACK):
        raise ValueError(
            f"time step {dt} exceeds pi/||H|| = {np.pi / bound} (energies would alias)"
        )


@dataclass(frozen=True)
class OverlapSequence:
    values: np.ndarray  # s_0 .. s_{2d+1}
    d: int
    dt: float
    evolution: Evolution = EXACT

    @property
    def dim(self):
        return 2 * self.d + 1

    def lag(self, m):
        """``s_m`` for any integer lag, using ``s_{-m} = conj(s_m)``."""
        return self.values[m] if m >= 0 else np.conj(self.values[-m])


@dataclass(frozen=True)
class KrylovPair:
    S: np.ndarray
    U: np.ndarray

    @property
    def dim(self):
        return self.S.shape[0]

    @property
    def center(self):
        return (self.dim - 1) // 2


class _Stepper:
    """Applies one forward or backward time step to a running state.

    Exact evolution runs in the eigenbasis, where a step is a phase multiply.
    """

    def __init__(self, H, dt, evolution, spectrum=None):
        self.H, self.dt, self.evolution = H, dt, evolution
        if evolution.kind == "exact":
            if spectrum is None:
                from .oracle import exact_spectrum

                spectrum = exact_spectrum(H)
            self.spectrum = spectrum
            self.phase = np.exp(-1j * dt * spectrum.energies)

    def encode(self, psi):
        if self.evolution.kind == "exact":
            return self.spectrum.vectors.conj().T @ psi
        return psi

    def step(self, x, j=1):
        if self.evolution.kind == "exact":
            return x * (self.phase if j > 0 else self.phase.conj())
        return evolve_trotter(x, self.H, self.dt, self.evolution.n_steps, j)


def _validate(psi0, H, dt, d, spectrum):
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.dim,):
        raise ValueError(f"state has shape {psi0.shape}, expected ({H.dim},)")
    if int(d) != d or d < 0:
        raise ValueError(f"half-width d must be a non-negative integer, got {d}")
    check_time_step(H, dt, spectrum)
    return psi0


def compute_overlaps(psi0, H, dt, d, evolution=EXACT, spectrum=None):
    """Distinct overlaps ``s_m = <psi0| E^m |psi0>`` for ``m = 0..2d+1``."""
    psi0 = _validate(psi0, H, dt, d, spectrum)
    stepper = _Stepper(H, dt, evolution, spectrum)
    ref = stepper.encode(psi0)
    x = ref
    values = np.empty(2 * d + 2, dtype=complex)
    values[0] = np.vdot(ref, ref)
    for m in range(1, 2 * d + 2):
        x = stepper.step(x)
        values[m] = np.vdot(ref, x)
    return OverlapSequence(values, int(d), float(dt), evolution)


def assemble(seq):
    """Toeplitz Gram matrix ``S[i,j] = s_{j-i}`` and ``U[i,j] = s_{j-i+1}``.

    Row/column 0 corresponds to ``j = -d``; ``psi^0`` sits at index ``d``.
    """
    if len(seq.values) < 2 * seq.d + 2:
        raise ValueError(
            f"overlap sequence has {len(seq.values)} values, need {2 * seq.d + 2}"
        )
    D = seq.dim
    lags = np.arange(D)[None, :] - np.arange(D)[:, None]
    full = np.concatenate([np.conj(seq.values[1:][::-1]), seq.values])  # lag -(2d+1)..2d+1
    offset = len(seq.values) - 1
    S = full[lags + offset]
    U = full[lags + 1 + offset]
    return KrylovPair(S, U)


def observable_column(psi0, H, dt, d, evolution, O, spectrum=None):
    """``<psi^j|O|psi^0>`` for ``j = -d..d`` (entry ``j + d``)."""
    psi0 = _validate(psi0, H, dt, d, spectrum)
    stepper = _Stepper(H, dt, evolution, spectrum)
    target = stepper.encode(O.apply(psi0))
    center = stepper.encode(psi0)
    col = np.empty(2 * d + 1, dtype=complex)
    col[d] = np.vdot(center, target)
    for sign in (1, -1):
        x = center
        for j in range(1, d + 1):
            x = stepper.step(x, sign)
            col[d + sign * j] = np.vdot(x, target)
    return col


def _format_matrix(mat):
    return "\n".join(
        " ".join(f"{z.real:.17e},{z.imag:.17e}" for z in row) for row in mat
    )


def save_pair(path, pair):
    """Write ``S`` then ``U`` as rows of ``re,im`` pairs."""
    with open(path, "w") as fh:
        fh.write(f"# KrylovPair D={pair.dim}\n# S\n")
        fh.write(_format_matrix(pair.S) + "\n# U\n")
        fh.write(_format_matrix(pair.U) + "\n")


def load_pair(path):
    blocks = {"S": [], "U": []}
    current = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                tag = line[1:].strip()
                if tag in blocks:
                    current = tag
                continue
            if current is None:
                raise ValueError("matrix data before a '# S' or '# U' marker")
            row = []
            for tok in line.split():
                re_, im_ = tok.split(",")
                row.append(complex(float(re_), float(im_)))
            blocks[current].append(row)
    S = np.array(blocks["S"], dtype=complex)
    U = np.array(blocks["U"], dtype=complex)
    if S.shape != U.shape or S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"malformed Krylov pair file: S {S.shape}, U {U.shape}")
    return KrylovPair(S, U)

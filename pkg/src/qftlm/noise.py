"""Gaussian measurement noise on Krylov data."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .krylov import KrylovPair, OverlapSequence, assemble

MODES = ("entrywise", "overlap")


@dataclass(frozen=True)
class NoiseModel:
    """Independent ``N(0, sigma^2)`` noise on real and imaginary parts.

    ``entrywise`` perturbs every entry of ``S`` and ``U`` (``S`` is then
    re-symmetrized); ``overlap`` perturbs the distinct overlaps ``s_m`` and
    rebuilds both matrices, keeping their Toeplitz structure.
    """

    sigma: float = 0.0
    mode: str = "entrywise"
    seed: int | None = None

    def __post_init__(self):
        if not (self.sigma >= 0 and np.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and non-negative, got {self.sigma}")
        if self.mode not in MODES:
            raise ValueError(f"noise mode must be one of {MODES}, got {self.mode!r}")


def _complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sequence_from_pair(pair, dt=float("nan")):
    """Recover ``s_0..s_{2d+1}`` from the first row of ``S`` and ``U``."""
    D = pair.dim
    values = np.concatenate([pair.S[0, :], pair.U[0, -1:]])
    return OverlapSequence(values, (D - 1) // 2, dt)


def perturb(data, model, rng=None):
    """Return a noisy copy of a ``KrylovPair`` or ``OverlapSequence``.

    Noise is drawn as standard normals scaled by ``sigma``, so runs sharing a
    stream see the same draws at every noise level. ``sigma = 0`` returns the
    input untouched.
    """
    if model.sigma == 0:
        return data
    if rng is None:
        rng = np.random.default_rng(model.seed)
    sigma = model.sigma

    if isinstance(data, OverlapSequence):
        if model.mode != "overlap":
            raise ValueError("an overlap sequence can only take overlap-mode noise")
        noise = _complex_normal(rng, data.values.shape)
        # s_0 sits on the diagonal of S; only its real part may change
        noise[0] = noise[0].real
        return replace(data, values=data.values + sigma * noise)

    if not isinstance(data, KrylovPair):
        raise TypeError(f"cannot perturb {type(data).__name__}")
    if model.mode == "overlap":
        return assemble(perturb(sequence_from_pair(data), model, rng))
    S = data.S + sigma * _complex_normal(rng, data.S.shape)
    U = data.U + sigma * _complex_normal(rng, data.U.shape)
    return KrylovPair(0.5 * (S + S.conj().T), U)

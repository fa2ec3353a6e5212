"""Scikit-learn style front end for the quantum finite-temperature Lanczos method."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .krylov import Evolution, assemble, compute_overlaps, default_time_step, observable_column
from .noise import NoiseModel, perturb
from .regdiag import RegularizationParams, format_diagnostics, regularized_diagonalization
from .statevector import random_source, sample_hutchinson
from .thermal import aggregate, extract_energies, observable_moment, state_moments
from .validation import (
    check_hamiltonian,
    check_positive_int,
    check_temperatures,
    krylov_half_width,
)

logger = logging.getLogger(__name__)

DEFAULT_ETA = 1e-12
NOISE_ETA_FACTOR = 100.0


def default_eta(sigma):
    return NOISE_ETA_FACTOR * sigma if sigma > 0 else DEFAULT_ETA


def _map(fn, items, n_jobs):
    if n_jobs and n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def simulate_pairs(H, d, dt, evolution, n_states, seed, repetition=0, spectrum=None, n_jobs=1):
    """Sample trace states and build their noiseless Krylov pairs.

    Returns ``(states, pairs)`` ordered by trace-state index.
    """
    if evolution.kind == "exact" and spectrum is None:
        from .oracle import exact_spectrum

        spectrum = exact_spectrum(H)

    def one(k):
        psi = sample_hutchinson(H.n_sites, random_source(seed, k, "state", repetition))
        return psi, assemble(compute_overlaps(psi, H, dt, d, evolution, spectrum))

    out = _map(one, range(n_states), n_jobs)
    return [x[0] for x in out], [x[1] for x in out]


def add_noise(pairs, noise, seed, repetition=0):
    """Perturb each pair with its own noise stream."""
    noise_seed = seed if noise.seed is None else noise.seed
    return [
        perturb(pair, noise, random_source(noise_seed, k, "noise", repetition))
        for k, pair in enumerate(pairs)
    ]


def decompose(pairs, params, n_jobs=1):
    decs = _map(lambda p: regularized_diagonalization(p.S, p.U, params), pairs, n_jobs)
    for k, dec in enumerate(decs):
        logger.info(format_diagnostics(dec.diagnostics, k))
    return decs


def curve_from_decompositions(decs, dt, temperatures, metadata=None):
    T = check_temperatures(temperatures)
    shift = min(float(extract_energies(dec.eigenvalues, dt).min()) for dec in decs)
    moments = [state_moments(dec, dt, 1.0 / T, shift) for dec in decs]
    return aggregate(moments, T, metadata)


class QFTLM(BaseEstimator):
    """Thermal expectation values from real-time Krylov subspaces of typical states.

    ``fit`` takes a :class:`~qftlm.hamiltonian.PauliHamiltonian`; ``predict``
    maps temperatures to thermal energies.

    Parameters
    ----------
    krylov_dim : int
        Krylov dimension ``D = 2d + 1``; even values are rounded down.
    n_states : int
        Number ``K`` of quantum Hutchinson trace states.
    evolution : {"exact", "trotter"}
    n_trotter : int
        First-order product-formula steps per time step (Trotter mode only).
    dt : float, optional
        Time step; defaults to ``pi / ||H||`` with the coefficient-sum norm
        bound, or the exact norm if ``use_exact_norm``.
    eta : float, optional
        Tikhonov shift; defaults to ``100 * noise_sigma`` or ``1e-12``.
    mu : float
        Singular-value truncation threshold.
    noise_sigma, noise_mode
        Gaussian noise added to ``S`` and ``U`` before regularization.
    random_state : int
        Master seed; trace state ``k`` uses an independent child stream.
    """

    def __init__(
        self,
        krylov_dim=41,
        n_states=40,
        evolution="exact",
        n_trotter=4,
        dt=None,
        eta=None,
        mu=0.9,
        noise_sigma=0.0,
        noise_mode="entrywise",
        random_state=0,
        repetition=0,
        use_exact_norm=False,
        n_jobs=1,
    ):
        self.krylov_dim = krylov_dim
        self.n_states = n_states
        self.evolution = evolution
        self.n_trotter = n_trotter
        self.dt = dt
        self.eta = eta
        self.mu = mu
        self.noise_sigma = noise_sigma
        self.noise_mode = noise_mode
        self.random_state = random_state
        self.repetition = repetition
        self.use_exact_norm = use_exact_norm
        self.n_jobs = n_jobs

    def _evolution(self):
        if self.evolution == "exact":
            return Evolution()
        if self.evolution == "trotter":
            return Evolution.trotter(check_positive_int(self.n_trotter, "n_trotter"))
        raise ValueError(f"evolution must be 'exact' or 'trotter', got {self.evolution!r}")

    def fit(self, H, y=None):
        H = check_hamiltonian(H)
        K = check_positive_int(self.n_states, "n_states")
        d = krylov_half_width(self.krylov_dim)
        evolution = self._evolution()
        noise = NoiseModel(self.noise_sigma, self.noise_mode)
        eta = default_eta(noise.sigma) if self.eta is None else self.eta
        params = RegularizationParams(eta, self.mu)

        spectrum = None
        if evolution.kind == "exact" or self.use_exact_norm:
            from .oracle import exact_spectrum

            spectrum = exact_spectrum(H)
        if self.dt is not None:
            dt = float(self.dt)
        elif self.use_exact_norm:
            dt = default_time_step(H, spectrum.spectral_norm)
        else:
            dt = default_time_step(H)

        states, clean = simulate_pairs(
            H, d, dt, evolution, K, self.random_state, self.repetition, spectrum, self.n_jobs
        )
        pairs = add_noise(clean, noise, self.random_state, self.repetition)

        self.hamiltonian_ = H
        self.dt_ = dt
        self.eta_ = eta
        self.half_width_ = d
        self.evolution_ = evolution
        self.spectrum_ = spectrum
        self.states_ = states
        self.pairs_ = pairs
        self.decompositions_ = decompose(pairs, params, self.n_jobs)
        return self

    def _metadata(self):
        return {
            "source": "qftlm",
            "L": self.hamiltonian_.n_sites,
            "D": 2 * self.half_width_ + 1,
            "K": len(self.decompositions_),
            "evolution": str(self.evolution_),
            "N_T": self.evolution_.n_steps if self.evolution_.kind == "trotter" else 0,
            "dt": repr(self.dt_),
            "eta": repr(self.eta_),
            "mu": repr(self.mu),
            "sigma": repr(self.noise_sigma),
            "noise_mode": self.noise_mode,
            "seed": self.random_state,
            "repetition": self.repetition,
        }

    def thermal_curve(self, temperatures):
        check_is_fitted(self, "decompositions_")
        return curve_from_decompositions(
            self.decompositions_, self.dt_, temperatures, self._metadata()
        )

    def predict(self, temperatures):
        """Thermal energy at each temperature."""
        return self.thermal_curve(temperatures).energy

    def heat_capacity(self, temperatures):
        return self.thermal_curve(temperatures).heat_capacity

    def expectation(self, O, temperatures):
        """Thermal expectation of an operator not diagonal in the energy basis.

        Uses the measured columns ``<psi^j|O|psi^0>`` and the Krylov projector.
        """
        check_is_fitted(self, "decompositions_")
        T = check_temperatures(temperatures)
        betas = 1.0 / T
        decs = self.decompositions_
        shift = min(float(extract_energies(dec.eigenvalues, self.dt_).min()) for dec in decs)
        num = np.zeros(T.shape)
        den = np.zeros(T.shape)
        for psi, dec in zip(self.states_, decs):
            col = observable_column(
                psi, self.hamiltonian_, self.dt_, self.half_width_, self.evolution_, O,
                self.spectrum_,
            )
            num += np.array([observable_moment(dec, self.dt_, b, col, shift).real for b in betas])
            den += state_moments(dec, self.dt_, betas, shift).z.real
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(den > 0, num / den, np.nan)

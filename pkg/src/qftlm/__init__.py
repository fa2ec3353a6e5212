"""Quantum finite-temperature Lanczos method, simulated on dense statevectors."""
from .estimator import QFTLM
from .hamiltonian import PauliHamiltonian, PauliString, build_tfim, norm_bound, parse_hamiltonian
from .krylov import Evolution, KrylovPair, OverlapSequence, assemble, compute_overlaps, observable_column
from .noise import NoiseModel, perturb
from .oracle import Spectrum, exact_spectrum, exact_state_moment, exact_thermal_curve
from .regdiag import (
    KrylovDecomposition,
    RegularizationError,
    RegularizationParams,
    inv_sqrt,
    nearest_unitary,
    regularized_diagonalization,
)
from .statevector import evolve_exact, evolve_trotter, inner, random_source, sample_hutchinson, trotter_step
from .thermal import StateMoments, ThermalCurve, aggregate, extract_energies, moment, observable_moment

__version__ = "0.1.0"

__all__ = [
    "QFTLM",
    "Evolution",
    "KrylovDecomposition",
    "KrylovPair",
    "NoiseModel",
    "OverlapSequence",
    "PauliHamiltonian",
    "PauliString",
    "RegularizationError",
    "RegularizationParams",
    "Spectrum",
    "StateMoments",
    "ThermalCurve",
    "aggregate",
    "assemble",
    "build_tfim",
    "compute_overlaps",
    "evolve_exact",
    "evolve_trotter",
    "exact_spectrum",
    "exact_state_moment",
    "exact_thermal_curve",
    "extract_energies",
    "inner",
    "inv_sqrt",
    "moment",
    "nearest_unitary",
    "norm_bound",
    "observable_column",
    "observable_moment",
    "parse_hamiltonian",
    "perturb",
    "random_source",
    "regularized_diagonalization",
    "sample_hutchinson",
    "trotter_step",
]

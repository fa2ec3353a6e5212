"""Input checks shared by the estimator and the experiment runner."""
from __future__ import annotations

import warnings

import numpy as np

from .hamiltonian import PauliHamiltonian


class ConfigError(ValueError):
    pass


def check_hamiltonian(H):
    if not isinstance(H, PauliHamiltonian):
        raise TypeError(f"expected a PauliHamiltonian, got {type(H).__name__}")
    if len(H) == 0:
        raise ValueError("Hamiltonian has no terms")
    return H


def check_temperatures(temperatures):
    """1-D array of positive finite temperatures."""
    T = np.atleast_1d(np.asarray(temperatures, dtype=float))
    if T.ndim != 1 or T.size == 0:
        raise ValueError("temperatures must be a non-empty 1-D array")
    if not np.all(np.isfinite(T)) or np.any(T <= 0):
        raise ValueError("temperatures must be positive and finite")
    return T


def check_positive_int(value, name):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def krylov_half_width(D):
    """Map a Krylov dimension to ``d = (D - 1) / 2``, rounding even ``D`` down."""
    D = check_positive_int(D, "krylov_dim")
    if D % 2 == 0:
        warnings.warn(f"Krylov dimension {D} is even; using {D - 1}", stacklevel=2)
        D -= 1
    if D < 1:
        raise ValueError("Krylov dimension must be at least 1")
    return (D - 1) // 2


def log_temperature_grid(t_min=1e-2, t_max=1e2, n_points=81):
    if not 0 < t_min <= t_max:
        raise ValueError("need 0 < t_min <= t_max")
    return np.logspace(np.log10(t_min), np.log10(t_max), check_positive_int(n_points, "n_points"))

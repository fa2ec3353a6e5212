import mpmath
import numpy as np
import pytest
import scipy.linalg

from qftlm.hamiltonian import build_tfim
from qftlm.oracle import exact_spectrum, exact_state_moment, exact_thermal_curve
from qftlm.statevector import random_source, sample_hutchinson

from conftest import random_state

R5 = np.sqrt(5.0)


def closed_form_energy(beta):
    return -(R5 * np.sinh(R5 * beta) + np.sinh(beta)) / (np.cosh(R5 * beta) + np.cosh(beta))


def test_spectrum_l2():
    spec = exact_spectrum(build_tfim(2))
    assert np.allclose(spec.energies, [-R5, -1, 1, R5])


@pytest.mark.parametrize("L", [2, 4, 6])
def test_spectrum_invariants(L):
    H = build_tfim(L)
    spec = exact_spectrum(H)
    M = H.to_dense()
    V, E = spec.vectors, spec.energies
    assert np.linalg.norm(M - V @ np.diag(E) @ V.conj().T) / np.linalg.norm(M) <= 1e-10
    assert np.all(np.diff(E) >= 0)
    assert abs(E.sum()) < 1e-10
    assert spec.spectral_norm <= 2 * L - 1


def test_dense_limit():
    with pytest.raises(ValueError):
        exact_spectrum(build_tfim(4), dense_limit=3)


def test_thermal_curve_l2_closed_form():
    T = np.logspace(-2, 2, 81)
    curve = exact_thermal_curve(exact_spectrum(build_tfim(2)), T)
    # closed form overflows beyond beta ~ 300; the grid stops at beta = 100
    assert np.allclose(curve.energy, closed_form_energy(1 / T), rtol=1e-12, atol=0)
    assert np.isclose(curve.energy[-1], 0.0, atol=0.1)
    assert np.isclose(exact_thermal_curve(exact_spectrum(build_tfim(2)), [1.0]).energy[0],
                      closed_form_energy(1.0), rtol=1e-14)


def test_thermal_curve_limits():
    spec = exact_spectrum(build_tfim(2))
    hot = exact_thermal_curve(spec, [1e12])
    assert abs(hot.energy[0]) < 1e-10 and abs(hot.heat_capacity[0]) < 1e-10
    cold = exact_thermal_curve(spec, [1e-3])
    assert np.isclose(cold.energy[0], -R5, atol=1e-12)


def test_low_temperature_matches_high_precision():
    mpmath.mp.dps = 50
    beta = mpmath.mpf(100)
    levels = [-mpmath.sqrt(5), -1, 1, mpmath.sqrt(5)]
    w = [mpmath.e ** (-beta * e) for e in levels]
    Z = sum(w)
    E = sum(wi * e for wi, e in zip(w, levels)) / Z
    var = sum(wi * (e - E) ** 2 for wi, e in zip(w, levels)) / Z
    curve = exact_thermal_curve(exact_spectrum(build_tfim(2)), [0.01])
    assert np.isfinite(curve.energy[0]) and np.isfinite(curve.heat_capacity[0])
    assert abs(curve.energy[0] - float(E)) <= 1e-10
    assert abs(curve.heat_capacity[0] - float(beta ** 2 * var)) <= 1e-10


def test_state_moment_against_expm(rng):
    H = build_tfim(4)
    spec = exact_spectrum(H)
    M = H.to_dense()
    psi = random_state(rng, 4)
    for beta in (0.0, 0.3, 2.0):
        G = scipy.linalg.expm(-beta * M)
        for p in (0, 1, 2):
            direct = np.vdot(psi, G @ np.linalg.matrix_power(M, p) @ psi).real
            assert abs(exact_state_moment(psi, spec, beta, p) - direct) <= 1e-10 * max(1, abs(direct))


def test_state_moment_examples():
    spec = exact_spectrum(build_tfim(3))
    v = spec.vectors[:, 1]
    E = spec.energies[1]
    assert np.isclose(exact_state_moment(random_state(np.random.default_rng(0), 3), spec, 0.0), 1.0)
    assert np.isclose(exact_state_moment(v, spec, 0.7, 2), np.exp(-0.7 * E) * E ** 2)
    with pytest.raises(ValueError):
        exact_state_moment(v[:4], spec, 0.1)


def test_state_moment_hutchinson_average():
    H = build_tfim(4)
    spec = exact_spectrum(H)
    n, beta = 10_000, 0.5
    for p in (0, 1, 2):
        target = np.sum(np.exp(-beta * spec.energies) * spec.energies ** p) / 16
        gen = random_source(21 + p)
        vals = np.array([exact_state_moment(sample_hutchinson(4, gen), spec, beta, p) for _ in range(n)])
        assert abs(vals.mean() - target) <= 5 * vals.std(ddof=1) / np.sqrt(n)

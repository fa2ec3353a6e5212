"""Declarative experiment configs and the sweep runners behind the CLI.

A config is a flat ``key = value`` file, one experiment per file::

    experiment = trotter-sweep
    hamiltonian = tfim
    L = 8
    D = 63
    K = 20
    N_T = 1, 2, 4, 8
    evolution = trotter
    T_slice = 0.025
    seed = 7

List-valued keys take comma-separated values.
"""
from __future__ import annotations

import configparser
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .estimator import add_noise, curve_from_decompositions, decompose, default_eta, simulate_pairs
from .hamiltonian import DENSE_LIMIT, parse_hamiltonian
from .krylov import Evolution, default_time_step
from .noise import MODES, NoiseModel
from .oracle import exact_spectrum, exact_thermal_curve
from .regdiag import RegularizationError, RegularizationParams
from .validation import ConfigError, krylov_half_width, log_temperature_grid

logger = logging.getLogger(__name__)

KINDS = ("curve", "trotter-sweep", "size-sweep", "noise-sweep", "eta-sweep", "oracle")

_LIST_KEYS = {"L", "D", "K", "N_T", "evolution", "noise.sigma", "eta", "T", "T_eval"}


def _fmt(x):
    return f"{float(x):.16e}"


@dataclass
class ExperimentConfig:
    kind: str = "curve"
    hamiltonian: str = "tfim"
    L: list = field(default_factory=list)  # derived from explicit term lists
    D: list = field(default_factory=lambda: [41])
    K: list = field(default_factory=lambda: [10])
    N_T: list = field(default_factory=lambda: [4])
    evolution: list = field(default_factory=lambda: ["trotter"])
    T_min: float = 1e-2
    T_max: float = 1e2
    T_points: int = 81
    T: list = field(default_factory=list)
    T_slice: float = 0.025
    T_eval: list = field(default_factory=lambda: [0.01, 1.0, 100.0])
    high_T: float = 1.0
    sigma: list = field(default_factory=lambda: [0.0])
    noise_mode: str = "entrywise"
    noise_seed: int | None = None
    eta: list = field(default_factory=list)  # empty: 100 * sigma or 1e-12
    mu: float = 0.9
    dt: float | None = None
    repetitions: int = 1
    seed: int = 0
    threads: int = 1
    dense_limit: int = DENSE_LIMIT
    out: str = "results"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if not self.L and self.hamiltonian.strip().lower() != "tfim":
            self.L = [self.hamiltonian_for(None).n_sites]
        for name in ("L", "D", "K", "N_T", "evolution", "sigma", "T_eval"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(k < 1 for k in self.K):
            raise ConfigError("K must be at least 1")
        if any(D < 1 for D in self.D):
            raise ConfigError("D must be at least 1")
        if any(n < 1 for n in self.N_T):
            raise ConfigError("N_T must be at least 1")
        if any(L < 1 for L in self.L):
            raise ConfigError("L must be at least 1")
        for ev in self.evolution:
            if ev not in ("exact", "trotter"):
                raise ConfigError(f"evolution must be exact or trotter, got {ev!r}")
        if self.noise_mode not in MODES:
            raise ConfigError(f"noise.mode must be one of {MODES}")
        if any(s < 0 for s in self.sigma) or any(e < 0 for e in self.eta):
            raise ConfigError("noise.sigma and eta must be non-negative")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.mu < 0:
            raise ConfigError("mu must be non-negative")

    def temperatures(self):
        if self.T:
            return np.array(sorted(self.T), dtype=float)
        return log_temperature_grid(self.T_min, self.T_max, self.T_points)

    def hamiltonian_for(self, L):
        try:
            return parse_hamiltonian(self.hamiltonian, L)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def as_metadata(self):
        meta = {}
        for key, value in self.__dict__.items():
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            meta[f"cfg.{key}"] = value
        return meta


_KEY_MAP = {
    "experiment": "kind",
    "noise.sigma": "sigma",
    "noise.mode": "noise_mode",
    "noise.seed": "noise_seed",
}
_INT_KEYS = {"L", "D", "K", "N_T", "T_points", "repetitions", "seed", "threads",
             "dense_limit", "noise.seed"}
_FLOAT_KEYS = {"T_min", "T_max", "T_slice", "high_T", "mu", "dt", "noise.sigma", "eta", "T",
               "T_eval"}


def _convert(key, raw):
    def scalar(tok):
        tok = tok.strip()
        if key in _INT_KEYS:
            value = float(tok)
            if value != int(value):
                raise ConfigError(f"{key} must be an integer, got {tok!r}")
            return int(value)
        if key in _FLOAT_KEYS:
            return float(tok)
        return tok

    try:
        if key in _LIST_KEYS:
            return [scalar(t) for t in raw.split(",") if t.strip()]
        return scalar(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text, kind=None):
    parser = configparser.ConfigParser(
        interpolation=None, delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    values = {}
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    for key, raw in parser["experiment"].items():
        name = _KEY_MAP.get(key, key)
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if raw.strip() == "" and name in ("noise_seed", "dt"):
            continue
        values[name] = _convert(key, raw)
    if kind is not None:
        if values.get("kind", kind) != kind:
            raise ConfigError(f"config declares experiment {values['kind']!r}, not {kind!r}")
        values["kind"] = kind
    return ExperimentConfig(**values)


def load_config(path, kind=None, **overrides):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    cfg = parse_config(text, kind)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


def _evolution(kind, n_trotter):
    return Evolution() if kind == "exact" else Evolution.trotter(n_trotter)


def _require_dense(cfg, L):
    if L > cfg.dense_limit:
        raise ConfigError(f"L={L} exceeds the dense limit {cfg.dense_limit} needed for the oracle")


def _relative_error(estimate, exact):
    """Relative error, falling back to absolute error where the exact value is 0."""
    exact = np.asarray(exact)
    zero = exact == 0
    denom = np.where(zero, 1.0, np.abs(exact))
    return np.abs(estimate - exact) / denom, zero


class _Problem:
    """Hamiltonian, time step and (when needed) spectrum for one system size."""

    def __init__(self, cfg, L, need_spectrum):
        self.H = cfg.hamiltonian_for(L)
        self.spectrum = exact_spectrum(self.H, cfg.dense_limit) if need_spectrum else None
        try:
            self.dt = cfg.dt if cfg.dt is not None else default_time_step(self.H)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def pairs(self, cfg, D, K, evolution, repetition):
        d = krylov_half_width(D)
        return simulate_pairs(
            self.H, d, self.dt, evolution, K, cfg.seed, repetition, self.spectrum, cfg.threads
        )[1]

    def curve(self, cfg, pairs, T, sigma, eta, repetition, meta):
        noise = NoiseModel(sigma, cfg.noise_mode, cfg.noise_seed)
        noisy = add_noise(pairs, noise, cfg.seed, repetition)
        decs = decompose(noisy, RegularizationParams(eta, cfg.mu), cfg.threads)
        return curve_from_decompositions(decs, self.dt, T, meta)


def _eta_for(cfg, sigma):
    return cfg.eta[0] if cfg.eta else default_eta(sigma)


def _cell(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(v)
    return _fmt(v)


def _write_table(path, header, rows, metadata):
    with open(path, "w") as fh:
        for key, value in metadata.items():
            fh.write(f"# {key}={value}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_cell(v) for v in row) + "\n")


def run_curve(cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    T = cfg.temperatures()
    written = {}
    for L in cfg.L:
        dense = L <= cfg.dense_limit
        evo_kind = cfg.evolution[0]
        if evo_kind == "exact" and not dense:
            raise ConfigError(f"exact evolution needs L <= {cfg.dense_limit}")
        prob = _Problem(cfg, L, need_spectrum=dense)
        evolution = _evolution(evo_kind, cfg.N_T[0])
        sigma = cfg.sigma[0]
        eta = _eta_for(cfg, sigma)
        for D in cfg.D:
            d = krylov_half_width(D)
            pairs = prob.pairs(cfg, D, cfg.K[0], evolution, 0)
            meta = {
                "source": "qftlm", "L": L, "D": 2 * d + 1, "K": cfg.K[0],
                "evolution": str(evolution), "N_T": cfg.N_T[0] if evo_kind == "trotter" else 0,
                "dt": repr(prob.dt), "eta": repr(eta), "mu": repr(cfg.mu), "sigma": repr(sigma),
                "noise_mode": cfg.noise_mode, "seed": cfg.seed, **cfg.as_metadata(),
            }
            curve = prob.curve(cfg, pairs, T, sigma, eta, 0, meta)
            path = out / f"qftlm_L{L}_D{2 * d + 1}.csv"
            curve.to_csv(path)
            written[path.name] = curve
        if dense:
            written.update(_write_oracle(cfg, prob, L, T, out))
    return written


def _write_oracle(cfg, prob, L, T, out):
    curve = exact_thermal_curve(prob.spectrum, T, prob.H)
    curve.metadata.update(cfg.as_metadata())
    path = out / f"exact_L{L}.csv"
    curve.to_csv(path)
    return {path.name: curve}


def run_oracle(cfg, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    for L in cfg.L:
        _require_dense(cfg, L)
        written.update(_write_oracle(cfg, _Problem(cfg, L, True), L, cfg.temperatures(), out))
    return written


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def run_trotter_sweep(cfg, out_dir):
    """Relative energy error per ``(N_T, T)`` and the log-log slope at ``T_slice``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    L, D, K = cfg.L[0], cfg.D[0], cfg.K[0]
    _require_dense(cfg, L)
    prob = _Problem(cfg, L, need_spectrum=True)
    T = np.union1d(cfg.temperatures(), [cfg.T_slice])
    exact = exact_thermal_curve(prob.spectrum, T).energy
    sigma = cfg.sigma[0]
    eta = _eta_for(cfg, sigma)
    evo_kind = cfg.evolution[0]

    errors = {}
    energies = {}
    for n in cfg.N_T:
        per_rep = []
        e_rep = []
        for rep in range(cfg.repetitions):
            pairs = prob.pairs(cfg, D, K, _evolution(evo_kind, n), rep)
            curve = prob.curve(cfg, pairs, T, sigma, eta, rep, {})
            err, _ = _relative_error(curve.energy, exact)
            per_rep.append(err)
            e_rep.append(curve.energy)
        errors[n] = np.mean(per_rep, axis=0)
        energies[n] = np.mean(e_rep, axis=0)

    _, absolute = _relative_error(exact, exact)
    i_slice = int(np.argmin(np.abs(T - cfg.T_slice)))
    slice_err = [errors[n][i_slice] for n in cfg.N_T]
    slope = loglog_slope(cfg.N_T, slice_err) if len(cfg.N_T) > 1 and all(e > 0 for e in slice_err) else math.nan
    meta = {"source": "trotter-sweep", "slope_at_T_slice": repr(slope), "T_slice": repr(cfg.T_slice),
            "dt": repr(prob.dt), "eta": repr(eta), **cfg.as_metadata()}
    rows = []
    for n in cfg.N_T:
        for i, t in enumerate(T):
            rows.append((n, t, energies[n][i], exact[i], errors[n][i],
                         "absolute" if absolute[i] else "relative"))
    _write_table(out / "trotter_sweep.csv", ["N_T", "T", "energy", "exact", "error", "error_kind"], rows, meta)
    _write_table(out / "trotter_slice.csv", ["N_T", "T", "error"],
                 [(n, T[i_slice], e) for n, e in zip(cfg.N_T, slice_err)], meta)
    return {"T": T, "errors": errors, "slope": slope, "slice_index": i_slice}


def _trend(values):
    diffs = np.diff(values)
    if np.all(diffs < 0):
        return "decreasing"
    if np.all(diffs > 0):
        return "increasing"
    return "mixed"


def run_size_sweep(cfg, out_dir):
    """Relative energy error against ``L`` at the temperatures in ``T_eval``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    T = np.array(sorted(cfg.T_eval), dtype=float)
    D = cfg.D[0]
    evolution = _evolution(cfg.evolution[0], cfg.N_T[0])
    sigma = cfg.sigma[0]
    eta = _eta_for(cfg, sigma)
    k_max = max(cfg.K)
    results = {}
    for L in cfg.L:
        _require_dense(cfg, L)
        prob = _Problem(cfg, L, need_spectrum=True)
        exact = exact_thermal_curve(prob.spectrum, T).energy
        for rep in range(cfg.repetitions):
            pairs = prob.pairs(cfg, D, k_max, evolution, rep)
            for K in cfg.K:
                # trace-state streams are per k, so the first K pairs are the K-state run
                curve = prob.curve(cfg, pairs[:K], T, sigma, eta, rep, {})
                err, _ = _relative_error(curve.energy, exact)
                results.setdefault((L, K), []).append(err)
    rows = []
    summary = {}
    for (L, K), errs in sorted(results.items()):
        errs = np.array(errs)
        med = np.median(errs, axis=0)
        summary[(L, K)] = med
        for i, t in enumerate(T):
            rows.append((L, K, t, float(np.mean(errs[:, i])), float(med[i]), len(errs)))
    meta = {"source": "size-sweep", "eta": repr(eta), **cfg.as_metadata()}
    if len(cfg.L) > 1:
        for K in cfg.K:
            for i, t in enumerate(T):
                meta[f"trend_K{K}_T{t:g}"] = _trend([summary[(L, K)][i] for L in cfg.L])
    _write_table(out / "size_sweep.csv", ["L", "K", "T", "mean_error", "median_error", "n_seeds"], rows, meta)
    return {"T": T, "median": summary, "raw": results}


def run_noise_sweep(cfg, out_dir):
    """Relative energy error against temperature for each noise level."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    L, D, K = cfg.L[0], cfg.D[0], cfg.K[0]
    _require_dense(cfg, L)
    prob = _Problem(cfg, L, need_spectrum=True)
    T = cfg.temperatures()
    exact = exact_thermal_curve(prob.spectrum, T).energy
    high = T >= cfg.high_T
    rows, summary_rows, results = [], [], {}
    for evo_kind in cfg.evolution:
        evolution = _evolution(evo_kind, cfg.N_T[0])
        pairs_by_rep = [prob.pairs(cfg, D, K, evolution, rep) for rep in range(cfg.repetitions)]
        for sigma in cfg.sigma:
            eta = _eta_for(cfg, sigma)
            errs = []
            for rep, pairs in enumerate(pairs_by_rep):
                curve = prob.curve(cfg, pairs, T, sigma, eta, rep, {})
                errs.append(_relative_error(curve.energy, exact)[0])
            errs = np.array(errs)
            mean_t = np.nanmean(errs, axis=0)
            high_per_rep = np.nanmean(errs[:, high], axis=1) if high.any() else np.full(len(errs), np.nan)
            results[(evo_kind, sigma)] = {"per_T": mean_t, "high_T_per_rep": high_per_rep}
            for i, t in enumerate(T):
                rows.append((evo_kind, sigma, eta, t, mean_t[i]))
            summary_rows.append((evo_kind, sigma, eta, float(np.mean(high_per_rep)), float(np.nanmean(mean_t))))
    meta = {"source": "noise-sweep", **cfg.as_metadata()}
    _write_table(out / "noise_sweep.csv", ["evolution", "sigma", "eta", "T", "mean_rel_error"], rows, meta)
    _write_table(out / "noise_summary.csv",
                 ["evolution", "sigma", "eta", "mean_rel_error_high_T", "mean_rel_error_all_T"],
                 summary_rows, meta)
    return {"T": T, "results": results}


def run_eta_sweep(cfg, out_dir):
    """Mean absolute energy error over the temperature grid for each ``(sigma, eta)``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    L, D, K = cfg.L[0], cfg.D[0], cfg.K[0]
    _require_dense(cfg, L)
    if not cfg.eta:
        raise ConfigError("eta-sweep needs a list of eta values")
    prob = _Problem(cfg, L, need_spectrum=True)
    T = cfg.temperatures()
    exact = exact_thermal_curve(prob.spectrum, T).energy
    evolution = _evolution(cfg.evolution[0], cfg.N_T[0])
    pairs_by_rep = [prob.pairs(cfg, D, K, evolution, rep) for rep in range(cfg.repetitions)]
    rows, results = [], {}
    for sigma in cfg.sigma:
        for eta in cfg.eta:
            per_rep, n_valid, status = [], 0, "ok"
            tmp = replace(cfg, eta=[eta])
            for rep, pairs in enumerate(pairs_by_rep):
                try:
                    curve = prob.curve(tmp, pairs, T, sigma, eta, rep, {})
                except RegularizationError as exc:
                    logger.warning("sigma=%g eta=%g rep=%d: %s", sigma, eta, rep, exc)
                    status = "failed"
                    continue
                ok = curve.valid
                n_valid += int(ok.sum())
                if ok.any():
                    per_rep.append(float(np.mean(np.abs(curve.energy[ok] - exact[ok]))))
                if not ok.all():
                    status = "invalid_points"
            err = float(np.mean(per_rep)) if per_rep else math.nan
            results[(sigma, eta)] = err
            rows.append((sigma, eta, err, n_valid, status))
    meta = {"source": "eta-sweep", **cfg.as_metadata()}
    _write_table(out / "eta_sweep.csv", ["sigma", "eta", "mean_abs_error", "n_valid", "status"], rows, meta)
    return results


RUNNERS = {
    "curve": run_curve,
    "trotter-sweep": run_trotter_sweep,
    "size-sweep": run_size_sweep,
    "noise-sweep": run_noise_sweep,
    "eta-sweep": run_eta_sweep,
    "oracle": run_oracle,
}

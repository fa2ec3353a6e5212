"""Spin Hamiltonians as weighted sums of Pauli strings.

Site 0 (the first character of a Pauli word) maps to the most significant
bit of the basis-state index, so ``"XI"`` flips the leading bit.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DENSE_LIMIT = 12

_PAULI_CHARS = frozenset("IXYZ")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Pauli operators, e.g. ``PauliString("ZZI")``."""

    word: str

    def __post_init__(self):
        word = self.word.upper()
        if not word:
            raise ValueError("Pauli word must cover at least one site")
        if not set(word) <= _PAULI_CHARS:
            raise ValueError(f"invalid Pauli word {self.word!r}")
        object.__setattr__(self, "word", word)

    def __len__(self):
        return len(self.word)

    @classmethod
    def from_sites(cls, n_sites, ops):
        """Build from a ``{site: "X"|"Y"|"Z"}`` mapping on ``n_sites`` sites."""
        chars = ["I"] * n_sites
        for site, op in ops.items():
            if not 0 <= site < n_sites:
                raise ValueError(f"site {site} out of range for {n_sites} sites")
            chars[site] = op
        return cls("".join(chars))

    def _mask(self, chars):
        n = len(self.word)
        m = 0
        for i, c in enumerate(self.word):
            if c in chars:
                m |= 1 << (n - 1 - i)
        return m

    @property
    def flip_mask(self):
        """Bits flipped by the string (X or Y sites)."""
        return self._mask("XY")

    @property
    def phase_mask(self):
        """Bits contributing a sign (Z or Y sites)."""
        return self._mask("ZY")

    @property
    def n_y(self):
        return self.word.count("Y")

    @property
    def is_identity(self):
        return set(self.word) == {"I"}

    @property
    def is_diagonal(self):
        return set(self.word) <= {"I", "Z"}

    @property
    def is_x_type(self):
        return set(self.word) <= {"I", "X"}

    def action(self, n_states=None):
        """Return ``(perm, phase)`` such that ``(P psi) = phase * psi[perm]``."""
        n_states = n_states or 2 ** len(self.word)
        idx = np.arange(n_states, dtype=np.int64)
        src = idx ^ self.flip_mask
        parity = _popcount(src & self.phase_mask) & 1
        phase = (1j ** self.n_y) * (1 - 2 * parity)
        return src, phase.astype(complex)


def _popcount(a):
    a = a.copy()
    count = np.zeros_like(a)
    while np.any(a):
        count += a & 1
        a >>= 1
    return count


@dataclass(frozen=True)
class PauliHamiltonian:
    """Real-weighted sum of Pauli strings on ``n_sites`` sites.

    Duplicate strings are merged on construction and exact zeros dropped.
    """

    n_sites: int
    terms: tuple = field(default=())

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("n_sites must be positive")
        merged = {}
        for coef, ps in self.terms:
            ps = ps if isinstance(ps, PauliString) else PauliString(ps)
            if len(ps) != self.n_sites:
                raise ValueError(
                    f"Pauli word {ps.word!r} has length {len(ps)}, expected {self.n_sites}"
                )
            if isinstance(coef, complex) or np.iscomplexobj(coef):
                if np.imag(coef) != 0:
                    raise ValueError("coefficients must be real for a Hermitian operator")
                coef = np.real(coef)
            coef = float(coef)
            if not np.isfinite(coef):
                raise ValueError("coefficients must be finite")
            merged[ps] = merged.get(ps, 0.0) + coef
        terms = tuple((c, ps) for ps, c in merged.items() if c != 0.0)
        object.__setattr__(self, "terms", terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def dim(self):
        return 2 ** self.n_sites

    @property
    def coefficients(self):
        return np.array([c for c, _ in self.terms])

    @cached_property
    def _actions(self):
        # group terms by flip mask so each permutation is applied once
        diag = np.zeros(self.dim)
        groups = {}
        for coef, ps in self.terms:
            perm, phase = ps.action(self.dim)
            if ps.flip_mask == 0:
                diag += coef * phase.real
            else:
                key = ps.flip_mask
                if key in groups:
                    groups[key] = (perm, groups[key][1] + coef * phase)
                else:
                    groups[key] = (perm, coef * phase)
        return diag, list(groups.values())

    @cached_property
    def diagonal(self):
        """Diagonal of the matrix in the computational basis."""
        return self._actions[0]

    def apply(self, psi):
        """Return ``H @ psi`` without forming the matrix."""
        psi = np.asarray(psi)
        if psi.shape[0] != self.dim:
            raise ValueError(f"state has length {psi.shape[0]}, expected {self.dim}")
        diag, offdiag = self._actions
        out = diag.reshape((-1,) + (1,) * (psi.ndim - 1)) * psi
        for perm, phase in offdiag:
            out = out + phase.reshape(out.shape[:1] + (1,) * (psi.ndim - 1)) * psi[perm]
        return out

    def to_dense(self, dense_limit=DENSE_LIMIT):
        if self.n_sites > dense_limit:
            raise ValueError(
                f"dense export limited to {dense_limit} sites, got {self.n_sites}"
            )
        n = self.dim
        mat = np.zeros((n, n), dtype=complex)
        diag, offdiag = self._actions
        mat[np.arange(n), np.arange(n)] = diag
        rows = np.arange(n)
        for perm, phase in offdiag:
            mat[rows, perm] += phase
        return mat

    def split_layers(self):
        """Split into a diagonal (Z-type) and an X-type part.

        Both parts consist of mutually commuting terms, which is what the
        first-order product formula needs. Terms mixing X with Z, or containing
        Y, are rejected.
        """
        diag, xtype = [], []
        for coef, ps in self.terms:
            if ps.is_diagonal:
                diag.append((coef, ps))
            elif ps.is_x_type:
                xtype.append((coef, ps))
            else:
                raise ValueError(
                    f"term {ps.word!r} fits neither the Z-type nor the X-type layer"
                )
        return (
            PauliHamiltonian(self.n_sites, tuple(diag)),
            PauliHamiltonian(self.n_sites, tuple(xtype)),
        )

    def __str__(self):
        return "; ".join(f"{c:+.15g} {ps.word}" for c, ps in self.terms)


def build_tfim(L):
    """Open-chain transverse-field Ising model ``sum X_i - sum Z_i Z_{i+1}``."""
    if int(L) != L or L < 2:
        raise ValueError(f"TFIM needs at least 2 sites, got {L}")
    L = int(L)
    terms = [(1.0, PauliString.from_sites(L, {i: "X"})) for i in range(L)]
    terms += [(-1.0, PauliString.from_sites(L, {i: "Z", i + 1: "Z"})) for i in range(L - 1)]
    return PauliHamiltonian(L, tuple(terms))


def norm_bound(H):
    """Sum of absolute coefficients, an upper bound on the spectral norm."""
    return float(np.sum(np.abs(H.coefficients))) if len(H) else 0.0


def parse_hamiltonian(text, L=None):
    """Parse ``"tfim"`` (with ``L``) or a ``;``-separated ``coef word`` list.

    >>> str(parse_hamiltonian("-1.0 ZZ; 0.5 XI"))
    '-1 ZZ; +0.5 XI'
    """
    text = text.strip()
    if text.lower() == "tfim":
        if L is None:
            raise ValueError("tfim Hamiltonian needs a system size L")
        return build_tfim(L)
    terms = []
    for chunk in text.replace("\n", ";").split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split()
        if len(parts) != 2:
            raise ValueError(f"cannot parse Hamiltonian term {chunk!r}")
        terms.append((float(parts[0]), PauliString(parts[1])))
    if not terms:
        raise ValueError("empty Hamiltonian term list")
    n = len(terms[0][1])
    if L is not None and L != n:
        raise ValueError(f"term length {n} does not match L={L}")
    return PauliHamiltonian(n, tuple(terms))

"""Joint spin-motion quantum states of a single trapped ion.

The register is one spin-1/2 (internal qubit, labelled down/up) tensored with
a harmonic-oscillator Fock ladder truncated at ``n_max``.  Basis ordering is
spin-major: ``index = spin * (n_max + 1) + n``, so all spin-down amplitudes
come first.  States are immutable; every operation returns a new value.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, TruncationError

NORM_TOL = 1e-12
POSITIVITY_TOL = 1e-10
TRUNCATION_CEILING = 1e-9
MIN_N_MAX = 4


class Spin(enum.IntEnum):
    DOWN = 0  # bright state, scatters detection photons
    UP = 1    # dark state


def _as_spin(spin) -> Spin:
    if isinstance(spin, Spin):
        return spin
    if isinstance(spin, str):
        try:
            return Spin[spin.upper()]
        except KeyError:
            raise DomainError(f"unknown spin label {spin!r}") from None
    return Spin(spin)


@dataclass(frozen=True)
class BasisLabel:
    """One basis level |spin, n> of the spin-motion register."""

    spin: Spin
    n: int

    def __post_init__(self):
        object.__setattr__(self, "spin", _as_spin(self.spin))
        if self.n < 0:
            raise DomainError(f"Fock index must be non-negative, got {self.n}")

    def __str__(self):
        return f"{self.spin.name.lower()}{self.n}"


def basis_index(spin, n: int, n_max: int) -> int:
    """Flat index of |spin, n> in the fixed spin-major ordering."""
    return int(_as_spin(spin)) * (n_max + 1) + n


class IonState:
    """Pure amplitude vector or density operator over the spin (x) Fock basis.

    ``data`` is a complex vector of length ``2 * (n_max + 1)`` for a pure
    state, or a square matrix of that dimension for a density operator.
    Construction validates normalization (and Hermiticity plus positivity for
    density operators); arrays are copied and frozen.
    """

    __slots__ = ("data", "n_max")

    def __init__(self, data, n_max: int, validate: bool = True):
        arr = np.array(data, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "n_max", int(n_max))
        if validate:
            self._check()

    def __setattr__(self, name, value):
        raise AttributeError("IonState is immutable")

    @property
    def dim(self) -> int:
        return 2 * (self.n_max + 1)

    @property
    def is_density(self) -> bool:
        return self.data.ndim == 2

    def _check(self):
        dim = self.dim
        if self.data.ndim == 1:
            if self.data.shape != (dim,):
                raise DomainError(f"pure state must have length {dim}, got {self.data.shape}")
            norm = float(np.sum(np.abs(self.data) ** 2))
            if abs(norm - 1.0) > NORM_TOL:
                raise DomainError(f"pure state norm {norm!r} deviates from 1 beyond {NORM_TOL}")
        elif self.data.ndim == 2:
            if self.data.shape != (dim, dim):
                raise DomainError(f"density operator must be {dim}x{dim}, got {self.data.shape}")
            herm = float(np.max(np.abs(self.data - self.data.conj().T)))
            if herm > NORM_TOL:
                raise DomainError(f"density operator non-Hermitian by {herm!r}")
            tr = float(np.trace(self.data).real)
            if abs(tr - 1.0) > NORM_TOL:
                raise DomainError(f"density operator trace {tr!r} deviates from 1")
            lo = float(np.linalg.eigvalsh(self.data)[0])
            if lo < -POSITIVITY_TOL:
                raise DomainError(f"density operator has negative eigenvalue {lo!r}")
        else:
            raise DomainError("state data must be a vector or a square matrix")

    def index(self, label: BasisLabel) -> int:
        if label.n > self.n_max:
            raise DomainError(f"Fock index {label.n} exceeds n_max={self.n_max}")
        return basis_index(label.spin, label.n, self.n_max)

    def amplitude(self, label) -> complex:
        """Amplitude on |label> (pure states only)."""
        if self.is_density:
            raise DomainError("amplitudes are defined for pure states only")
        return complex(self.data[self.index(_as_label(label))])

    def population(self, label) -> float:
        i = self.index(_as_label(label))
        if self.is_density:
            return float(self.data[i, i].real)
        return float(np.abs(self.data[i]) ** 2)

    def populations(self) -> np.ndarray:
        """Diagonal populations in the fixed basis ordering."""
        if self.is_density:
            return np.real(np.diag(self.data)).copy()
        return np.abs(self.data) ** 2

    def p_down(self) -> float:
        """Probability of finding the ion in the bright spin-down manifold."""
        pops = self.populations()
        return float(np.clip(np.sum(pops[: self.n_max + 1]), 0.0, 1.0))

    def to_density(self) -> IonState:
        """Promote to a density operator; density inputs pass through unchanged."""
        if self.is_density:
            return self
        rho = np.outer(self.data, self.data.conj())
        return IonState(rho, self.n_max)

    def purity(self) -> float:
        if not self.is_density:
            return 1.0
        return float(np.trace(self.data @ self.data).real)


def _as_label(label) -> BasisLabel:
    if isinstance(label, BasisLabel):
        return label
    spin, n = label
    return BasisLabel(spin, int(n))


def new_basis_state(label, n_max: int) -> IonState:
    """Pure state with unit amplitude on one basis level."""
    lab = _as_label(label)
    if n_max < MIN_N_MAX:
        raise ConfigError(f"n_max must be at least {MIN_N_MAX}, got {n_max}")
    if lab.n > n_max:
        raise ConfigError(f"Fock index {lab.n} exceeds n_max={n_max}")
    vec = np.zeros(2 * (n_max + 1), dtype=np.complex128)
    vec[basis_index(lab.spin, lab.n, n_max)] = 1.0
    return IonState(vec, n_max)


def fidelity(a: IonState, b: IonState) -> float:
    """Overlap fidelity.

    |<a|b>|^2 for two pure states, <psi|rho|psi> for a pure/density pair.
    A density/density pair is not supported.
    """
    if a.n_max != b.n_max:
        raise DomainError("states must share the same n_max")
    if a.is_density and b.is_density:
        raise DomainError("fidelity of two density operators is not supported")
    if not a.is_density and not b.is_density:
        return float(np.abs(np.vdot(a.data, b.data)) ** 2)
    psi, rho = (a, b) if not a.is_density else (b, a)
    val = float(np.real(np.vdot(psi.data, rho.data @ psi.data)))
    return float(np.clip(val, 0.0, 1.0))


def check_truncation(state: IonState, ceiling: float = TRUNCATION_CEILING) -> IonState:
    """Raise if the top two Fock levels carry non-negligible population."""
    pops = state.populations()
    per_n = pops[: state.n_max + 1] + pops[state.n_max + 1 :]
    top = float(per_n[state.n_max - 1] + per_n[state.n_max])
    if top >= ceiling:
        raise TruncationError(
            f"population {top:.3e} in Fock levels {state.n_max - 1},{state.n_max} "
            f"exceeds the truncation ceiling {ceiling:.1e}; increase n_max"
        )
    return state


def to_json_dict(state: IonState) -> dict:
    """JSON-ready form: fixed basis ordering, row-major for density operators."""
    flat = state.data.ravel()
    return {
        "n_max": state.n_max,
        "repr": "density" if state.is_density else "pure",
        "amplitudes": [[float(z.real), float(z.imag)] for z in flat],
    }


def state_from_json(d: dict) -> IonState:
    n_max = int(d["n_max"])
    kind = d["repr"]
    if kind not in ("pure", "density"):
        raise ConfigError(f"unknown state repr {kind!r}")
    flat = np.array([complex(re, im) for re, im in d["amplitudes"]], dtype=np.complex128)
    dim = 2 * (n_max + 1)
    if kind == "density":
        flat = flat.reshape(dim, dim)
    return IonState(flat, n_max)

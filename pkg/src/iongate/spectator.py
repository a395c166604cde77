"""Off-resonant sideband couplings: level shifts, exact dynamics, leakage.

In the frame rotating at the qubit splitting, a resonant carrier drive is
described by the time-independent dressed Hamiltonian (in units of hbar)

    H = omega_z * N  +  sum_{n,m} Omega_{n,m} (|up,m><down,n| + h.c.),

whose diagonal is n * omega_z on both spin manifolds and whose off-diagonal
blocks hold every sideband coupling at once.  Second-order perturbation
theory in the off-resonant couplings gives the level shift

    shift(n) = sum_{i != n, i >= 0} Omega_{i,n}^2 / ((n - i) * omega_z),

identical for |down, n> and |up, n> because each sees the same set of
couplings at the same detunings.  The resonant coupling Omega_{n,n} splits
each (down, up) pair symmetrically by +/- Omega_{n,n}; the perturbative
shift is the displacement of the pair center, so the exact reference is the
mean of the two paired eigenvalues from a dense diagonalization.
"""

from __future__ import annotations

import math

import numpy as np

from .coupling import CouplingModel
from .errors import DomainError, StrongCouplingError, TruncationError
from .states import BasisLabel, IonState, Spin, _as_spin, check_truncation, new_basis_state

#: Perturbative sums need this many Fock levels of headroom above n.
SHIFT_HEADROOM = 5

#: Minimum eigenvector weight on a resonant pair subspace for assignment.
ASSIGNMENT_FLOOR = 0.5


def dressed_hamiltonian(model: CouplingModel) -> np.ndarray:
    """Dense dressed Hamiltonian over the spin-major basis, in rad/s."""
    size = model.n_max + 1
    h = np.zeros((2 * size, 2 * size))
    fock = np.arange(size, dtype=float) * model.omega_z
    h[np.arange(size), np.arange(size)] = fock
    h[size + np.arange(size), size + np.arange(size)] = fock
    for n in range(size):
        for m in range(size):
            h[size + m, n] = model.rabi_element(n, m)
            h[n, size + m] = model.rabi_element(n, m)
    return h


def perturbative_shift(model: CouplingModel, spin, n: int) -> float:
    """Second-order level shift of |spin, n> from all off-resonant sidebands.

    The spin argument is accepted for symmetry with the level labels; the
    formula gives the same value for both spins, which is the cancellation
    that keeps the qubit splitting unshifted during the drive.
    """
    _as_spin(spin)
    if n < 0 or n > model.n_max:
        raise DomainError(f"Fock index {n} outside 0..{model.n_max}")
    if n > model.n_max - SHIFT_HEADROOM:
        raise TruncationError(
            f"n={n} leaves fewer than {SHIFT_HEADROOM} levels of headroom below "
            f"n_max={model.n_max}; the shift sum would be visibly truncated"
        )
    total = 0.0
    for i in range(model.n_max + 1):
        if i == n:
            continue
        omega = model.rabi_element(i, n)
        total += omega * omega / ((n - i) * model.omega_z)
    return total


def exact_shifts(model: CouplingModel) -> list[tuple[BasisLabel, float]]:
    """Pair-center level shifts from dense diagonalization.

    Each eigenvector is assigned to the resonant pair subspace
    span{|down,n>, |up,n>} on which it has the largest weight; if any best
    weight falls below 0.5, or some pair does not collect exactly two
    eigenvalues, the perturbative picture has broken down and a
    StrongCouplingError is raised.  The reported shift for both members of a
    pair is the mean of its two eigenvalues minus n * omega_z.
    """
    size = model.n_max + 1
    evals, evecs = np.linalg.eigh(dressed_hamiltonian(model))
    weights = np.abs(evecs[:size, :]) ** 2 + np.abs(evecs[size:, :]) ** 2  # (n, eigvec)
    assigned: dict[int, list[float]] = {n: [] for n in range(size)}
    for k in range(2 * size):
        n_best = int(np.argmax(weights[:, k]))
        best = float(weights[n_best, k])
        if best < ASSIGNMENT_FLOOR:
            raise StrongCouplingError(
                f"eigenvector {k} has at most weight {best:.3f} on any resonant pair; "
                "the coupling is too strong for a perturbative level assignment"
            )
        assigned[n_best].append(float(evals[k]))
    out = []
    for n in range(size):
        pair = assigned[n]
        if len(pair) != 2:
            raise StrongCouplingError(
                f"resonant pair n={n} collected {len(pair)} eigenvalues instead of 2"
            )
        shift = 0.5 * (pair[0] + pair[1]) - n * model.omega_z
        out.append((BasisLabel(Spin.DOWN, n), shift))
        out.append((BasisLabel(Spin.UP, n), shift))
    return out


def exact_shift_by_n(model: CouplingModel) -> dict[int, float]:
    """Pair-center shifts keyed by Fock index."""
    return {label.n: shift for label, shift in exact_shifts(model) if label.spin == Spin.DOWN}


def propagate_exact(state: IonState, t: float, model: CouplingModel) -> IonState:
    """Evolve under the full dressed Hamiltonian for time t.

    The propagator exp(-i H t) is built by eigendecomposition, then the free
    oscillator phases exp(-i n omega_z t) are stripped so the result lives in
    the same interaction picture as the pulse operations.
    """
    if state.n_max != model.n_max:
        raise DomainError("state and model must share the same n_max")
    if t < 0:
        raise DomainError("propagation time must be non-negative")
    evals, evecs = np.linalg.eigh(dressed_hamiltonian(model))
    u = _frame_propagator(evals, evecs, t, model)
    if state.is_density:
        out = IonState(u @ state.data @ u.conj().T, state.n_max)
    else:
        out = IonState(u @ state.data, state.n_max)
    return check_truncation(out)


def _frame_propagator(evals, evecs, t: float, model: CouplingModel) -> np.ndarray:
    size = model.n_max + 1
    u = (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T
    frame = np.exp(1j * np.arange(size) * model.omega_z * t)
    return np.concatenate([frame, frame])[:, None] * u


COMPUTATIONAL_LABELS = (
    BasisLabel(Spin.DOWN, 0),
    BasisLabel(Spin.UP, 0),
    BasisLabel(Spin.DOWN, 2),
    BasisLabel(Spin.UP, 2),
)


def model_at_speed(model: CouplingModel, speed: float) -> CouplingModel:
    """Copy of the model with the n=0 carrier rate set to speed * omega_z."""
    if speed <= 0:
        raise DomainError("speed must be positive")
    return model.at_carrier_rate(speed * model.omega_z)


def leakage_scan(model: CouplingModel, speeds) -> list[tuple[float, float]]:
    """Average gate leakage out of the computational basis at each drive speed.

    For each speed Omega_{0,0} / omega_z the full conditional gate is run
    with the exact propagator on the four computational basis states;
    leakage is one minus the population remaining on
    {down, up} x {0, 2}, averaged over the four inputs.
    """
    speeds = [float(s) for s in speeds]
    if any(s <= 0 or s > 0.5 for s in speeds):
        raise DomainError("speeds must lie in (0, 0.5]")
    results = []
    for speed in speeds:
        m = model_at_speed(model, speed)
        evals, evecs = np.linalg.eigh(dressed_hamiltonian(m))
        u = _frame_propagator(evals, evecs, m.gate_time(), m)
        total = 0.0
        for label in COMPUTATIONAL_LABELS:
            psi = new_basis_state(label, m.n_max)
            out = IonState(u @ psi.data, m.n_max)
            kept = sum(out.population(lab) for lab in COMPUTATIONAL_LABELS)
            total += 1.0 - kept
        results.append((speed, total / len(COMPUTATIONAL_LABELS)))
    return results


def fit_power_law(x, y) -> tuple[float, float]:
    """Least-squares exponent and prefactor of y = prefactor * x**exponent."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    exponent, intercept = np.polyfit(lx, ly, 1)
    return float(exponent), float(math.exp(intercept))


def shift_table(model: CouplingModel, max_n: int | None = None) -> list[dict]:
    """Rows comparing perturbative and exact pair-center shifts per Fock level."""
    if max_n is None:
        max_n = min(8, model.n_max - SHIFT_HEADROOM)
    if max_n > model.n_max - SHIFT_HEADROOM:
        raise DomainError(
            f"max_n={max_n} exceeds the perturbative headroom limit "
            f"{model.n_max - SHIFT_HEADROOM}"
        )
    exact = exact_shift_by_n(model)
    rows = []
    for n in range(max_n + 1):
        pert = perturbative_shift(model, Spin.DOWN, n)
        ex = exact[n]
        rel = abs(pert - ex) / abs(ex) if ex != 0.0 else 0.0
        rows.append(
            {"level": n, "shift_pert": pert, "shift_exact": ex, "rel_err": rel}
        )
    return rows

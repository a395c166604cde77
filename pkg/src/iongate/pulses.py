"""Carrier and sideband pulses on the spin-motion register.

A pulse on sideband order ``delta_n`` couples every pair
(|down, n>, |up, n + delta_n>) that fits inside the Fock ladder and rotates
its two amplitudes by

    c'_up   = cos(Omega t) c_up   - i e^{+i phi} sin(Omega t) c_down
    c'_down = cos(Omega t) c_down - i e^{-i phi} sin(Omega t) c_up

with Omega the matrix element of that pair.  Levels with no partner inside
the ladder (for example |down, 0> under a red sideband) are left untouched.
Pulse areas follow the convention area = 2 Omega t, so a "pi pulse"
(area = pi) transfers the referenced pair completely and the conditional
gate is the carrier pulse with Omega_{0,0} t = 2 pi.

Noise enters in two ways, both tied to one time constant ``tau``:

* :func:`apply_contrast_decay` damps every coherence between opposite spin
  labels by exp(-elapsed / tau), the dephasing produced by slow qubit
  frequency fluctuations.  Sequence helpers apply it after each pulse with
  the pulse duration as the elapsed time.
* :func:`apply_pulse_with_contrast_loss` models drive-amplitude jitter on a
  long pulse: the ensemble average keeps the ideal unitary with weight
  (1 + f) / 2 and the fully transferred branch with weight (1 - f) / 2,
  f = exp(-t / tau), which damps the within-pair Rabi oscillation contrast
  by exactly f while remaining completely positive and trace preserving.
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingModel
from .errors import ConfigError, DegeneratePulseError, DomainError
from .states import BasisLabel, IonState, Spin, check_truncation, new_basis_state

MAX_SIDEBAND_ORDER = 3

#: Carrier ratio required for the conditional gate (two cycles vs. 1.5 cycles).
GATE_RATIO = 4.0 / 3.0


class GateRatioWarning(UserWarning):
    """The coupling model is detuned from the 4/3 carrier-ratio gate condition."""


@dataclass(frozen=True)
class PulseSpec:
    """One drive pulse: sideband order, duration in seconds, phase in radians."""

    delta_n: int
    duration: float
    phase: float = 0.0

    def __post_init__(self):
        if abs(self.delta_n) > MAX_SIDEBAND_ORDER:
            raise DomainError(
                f"sideband order must satisfy |delta_n| <= {MAX_SIDEBAND_ORDER}, got {self.delta_n}"
            )
        if self.duration < 0:
            raise DomainError("pulse duration must be non-negative")


@dataclass(frozen=True)
class NoiseConfig:
    """Contrast decay time constant and preparation spin-flip probability."""

    tau: float = math.inf
    prep_error: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise DomainError("tau must be positive (math.inf disables decay)")
        if not 0.0 <= self.prep_error <= 1.0:
            raise DomainError("prep_error must lie in [0, 1]")

    @property
    def is_ideal(self) -> bool:
        return math.isinf(self.tau) and self.prep_error == 0.0


def coupled_pairs(delta_n: int, n_max: int):
    """Yield (down Fock index, up Fock index) for every pair inside the ladder."""
    for n in range(max(0, -delta_n), n_max - max(0, delta_n) + 1):
        yield n, n + delta_n


def pulse_unitary(pulse: PulseSpec, model: CouplingModel) -> np.ndarray:
    """Dense unitary implementing one pulse in the fixed basis ordering."""
    size = model.n_max + 1
    u = np.eye(2 * size, dtype=np.complex128)
    up_phase = -1j * cmath.exp(1j * pulse.phase)
    down_phase = -1j * cmath.exp(-1j * pulse.phase)
    for n, m in coupled_pairs(pulse.delta_n, model.n_max):
        theta = model.rabi_element(n, m) * pulse.duration
        i_down = n
        i_up = size + m
        c, s = math.cos(theta), math.sin(theta)
        u[i_down, i_down] = c
        u[i_up, i_up] = c
        u[i_up, i_down] = up_phase * s
        u[i_down, i_up] = down_phase * s
    return u


def _pair_flip_unitary(delta_n: int, phase: float, n_max: int) -> np.ndarray:
    """Full-transfer (quarter-cycle) unitary on every pair coupled by delta_n."""
    size = n_max + 1
    u = np.eye(2 * size, dtype=np.complex128)
    up_phase = -1j * cmath.exp(1j * phase)
    down_phase = -1j * cmath.exp(-1j * phase)
    for n, m in coupled_pairs(delta_n, n_max):
        u[n, n] = 0.0
        u[size + m, size + m] = 0.0
        u[size + m, n] = up_phase
        u[n, size + m] = down_phase
    return u


def _apply_unitary(state: IonState, u: np.ndarray) -> IonState:
    if state.is_density:
        return IonState(u @ state.data @ u.conj().T, state.n_max)
    return IonState(u @ state.data, state.n_max)


def apply_pulse(state: IonState, pulse: PulseSpec, model: CouplingModel) -> IonState:
    """Apply one pulse unitarily; raises if population reaches the Fock ceiling."""
    if state.n_max != model.n_max:
        raise DomainError("state and model must share the same n_max")
    out = _apply_unitary(state, pulse_unitary(pulse, model))
    return check_truncation(out)


def apply_area(
    state: IonState,
    delta_n: int,
    area: float,
    phase: float,
    model: CouplingModel,
    reference_n: int,
) -> IonState:
    """Apply a pulse specified by nominal area on the pair whose down-side
    Fock index is ``reference_n`` (a pi pulse transfers that pair fully)."""
    return apply_pulse(state, area_pulse(delta_n, area, phase, model, reference_n), model)


def area_pulse(
    delta_n: int, area: float, phase: float, model: CouplingModel, reference_n: int
) -> PulseSpec:
    """PulseSpec whose duration realizes the requested area on the reference pair."""
    if area < 0:
        raise DomainError("pulse area must be non-negative")
    partner = reference_n + delta_n
    if not (0 <= reference_n <= model.n_max and 0 <= partner <= model.n_max):
        raise DomainError(
            f"reference pair ({reference_n}, {partner}) does not fit inside 0..{model.n_max}"
        )
    omega_ref = model.rabi_element(reference_n, partner)
    if omega_ref <= 1e-9 * model.omega_base:
        raise DegeneratePulseError(
            f"vanishing Rabi rate on pair ({reference_n}, {partner}); the pulse area is undefined"
        )
    return PulseSpec(delta_n, 0.5 * area / omega_ref, phase)


def apply_contrast_decay(state: IonState, elapsed: float, noise: NoiseConfig | None) -> IonState:
    """Damp every coherence between opposite spin labels by exp(-elapsed / tau).

    Diagonal entries and same-spin motional coherences are untouched, so the
    trace is preserved exactly and the map is a valid dephasing channel.
    Pure inputs are promoted to density operators unless the factor is 1.
    """
    if elapsed < 0:
        raise DomainError("elapsed time must be non-negative")
    if noise is None or math.isinf(noise.tau) or elapsed == 0.0:
        return state
    factor = math.exp(-elapsed / noise.tau)
    return _scale_spin_coherences(state, factor)


def dephase_spin_coherences(state: IonState) -> IonState:
    """Remove every coherence between opposite spin labels completely."""
    return _scale_spin_coherences(state, 0.0)


def _scale_spin_coherences(state: IonState, factor: float) -> IonState:
    rho = state.to_density().data.copy()
    size = state.n_max + 1
    rho[:size, size:] *= factor
    rho[size:, :size] *= factor
    return IonState(rho, state.n_max)


def apply_pulse_with_contrast_loss(
    state: IonState, pulse: PulseSpec, model: CouplingModel, noise: NoiseConfig | None
) -> IonState:
    """Apply a pulse whose drive amplitude jitters from shot to shot.

    The averaged channel mixes the ideal pulse (weight (1 + f) / 2) with the
    pulse followed by a full transfer on every coupled pair (weight
    (1 - f) / 2), f = exp(-duration / tau).  Starting from any population
    distribution this damps the oscillating part of each pair's transfer
    probability by exactly f and leaves the time-averaged part alone.  The
    spin-dephasing channel for the same elapsed time is applied afterwards.
    """
    if noise is None or math.isinf(noise.tau):
        return apply_pulse(state, pulse, model)
    ideal = apply_pulse(state, pulse, model)
    f = math.exp(-pulse.duration / noise.tau)
    flip = _pair_flip_unitary(pulse.delta_n, pulse.phase, model.n_max)
    flipped = _apply_unitary(ideal, flip)
    rho = 0.5 * (1.0 + f) * ideal.to_density().data + 0.5 * (1.0 - f) * flipped.to_density().data
    mixed = IonState(rho, state.n_max)
    return apply_contrast_decay(mixed, pulse.duration, noise)


def apply_sequence(
    state: IonState,
    pulses,
    model: CouplingModel,
    noise: NoiseConfig | None = None,
) -> IonState:
    """Apply pulses in order, with contrast decay after each when noise is set."""
    for pulse in pulses:
        state = apply_pulse(state, pulse, model)
        if noise is not None and not math.isinf(noise.tau):
            state = apply_contrast_decay(state, pulse.duration, noise)
    return state


def cnot(state: IonState, model: CouplingModel) -> IonState:
    """Conditional gate: one carrier pulse of duration 2 pi / Omega_{0,0}.

    Ideal action on the computational basis at carrier ratio 4/3:
    |down,0> -> |down,0>, |up,0> -> |up,0>, |down,2> -> i |up,2>,
    |up,2> -> i |down,2>.  A detuned model only triggers a warning, since
    the gate logic degrades smoothly away from the exact ratio.
    """
    ratio = model.carrier_ratio()
    if abs(ratio - GATE_RATIO) > 1e-6 * GATE_RATIO:
        warnings.warn(
            f"carrier ratio {ratio:.6f} deviates from 4/3; gate logic will be approximate",
            GateRatioWarning,
            stacklevel=2,
        )
    return apply_pulse(state, PulseSpec(0, model.gate_time(), 0.0), model)


PREP_RECIPES = ("down0", "up0", "down2", "up2", "superposition", "phase-state")


def prep_pulses(recipe: str, model: CouplingModel, phase: float = 0.0) -> list[PulseSpec]:
    """Pulse list realizing a named preparation from |down, 0>.

    down2 climbs the ladder with a first-blue then first-red pi pulse;
    up2 is a single second-blue pi pulse; "superposition" is the half
    pulse on the second blue sideband giving (|down,0> - i |up,2>)/sqrt(2);
    "phase-state" is a half pulse on the first blue sideband with the given
    phase followed by a first-red pi pulse, producing
    |down>(|0> + e^{i(phase + pi)} |2>)/sqrt(2).
    """
    pi = math.pi
    if recipe == "down0":
        return []
    if recipe == "up0":
        return [area_pulse(0, pi, 0.0, model, 0)]
    if recipe == "down2":
        return [area_pulse(+1, pi, 0.0, model, 0), area_pulse(-1, pi, 0.0, model, 2)]
    if recipe == "up2":
        return [area_pulse(+2, pi, 0.0, model, 0)]
    if recipe == "superposition":
        return [area_pulse(+2, 0.5 * pi, 0.0, model, 0)]
    if recipe == "phase-state":
        return [area_pulse(+1, 0.5 * pi, phase, model, 0), area_pulse(-1, pi, 0.0, model, 2)]
    raise ConfigError(f"unknown preparation recipe {recipe!r}; expected one of {PREP_RECIPES}")


def prep(
    recipe: str,
    model: CouplingModel,
    noise: NoiseConfig | None = None,
    phase: float = 0.0,
) -> IonState:
    """Prepare a named input state from the cooled ground state.

    With ``prep_error > 0`` the result is the density operator mixing the
    ideal output (weight 1 - prep_error) with its spin-flipped counterpart.
    The output is deterministic; shot noise enters only at readout.
    """
    state = new_basis_state(BasisLabel(Spin.DOWN, 0), model.n_max)
    state = apply_sequence(state, prep_pulses(recipe, model, phase), model, noise)
    if noise is not None and noise.prep_error > 0.0:
        e = noise.prep_error
        rho = state.to_density().data
        flipped = spin_flip(IonState(rho, state.n_max)).data
        state = IonState((1.0 - e) * rho + e * flipped, state.n_max)
    return state


def spin_flip(state: IonState) -> IonState:
    """Swap the down and up manifolds at every Fock index."""
    size = state.n_max + 1
    perm = np.concatenate([np.arange(size, 2 * size), np.arange(0, size)])
    if state.is_density:
        return IonState(state.data[np.ix_(perm, perm)], state.n_max)
    return IonState(state.data[perm], state.n_max)


def pulses_to_json(pulses) -> str:
    """Serialize a pulse sequence to a JSON list of records."""
    records = [
        {"delta_n": p.delta_n, "duration_s": p.duration, "phase_rad": p.phase} for p in pulses
    ]
    return json.dumps(records, indent=2)


def pulses_from_json(text: str) -> list[PulseSpec]:
    records = json.loads(text)
    if not isinstance(records, list):
        raise ConfigError("pulse sequence JSON must be a list of records")
    out = []
    for rec in records:
        try:
            out.append(
                PulseSpec(int(rec["delta_n"]), float(rec["duration_s"]), float(rec.get("phase_rad", 0.0)))
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad pulse record {rec!r}") from exc
    return out

"""End-to-end experiment pipelines: prepare, gate, read out, tabulate.

Every scan point is an independent experiment with its own derived seed, so
scans are reproducible for a fixed master seed and order-independent.  Each
pipeline can bypass the detection chain and report exact populations, which
separates tests of the dynamics from tests of the readout statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coupling import CouplingModel
from .errors import ConfigError, DomainError
from .pulses import (
    NoiseConfig,
    PulseSpec,
    apply_contrast_decay,
    apply_pulse,
    apply_pulse_with_contrast_loss,
    apply_sequence,
    area_pulse,
    cnot,
    dephase_spin_coherences,
    prep,
)
from .readout import DetectorModel, estimate_p_down, simulate_histogram

TRUTH_TABLE_INPUTS = ("down0", "up0", "down2", "up2")

#: Exact bright-state pattern of the conditional gate on the four inputs.
IDEAL_TRUTH_TABLE = (1.0, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ScanCurve:
    """Scan of estimated bright fractions with per-point uncertainties."""

    x: np.ndarray
    p_down: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p_down, dtype=float)
        s = np.asarray(self.sigma, dtype=float)
        if not (x.size == p.size == s.size):
            raise DomainError("scan arrays must have matching lengths")
        if x.size and np.any(np.diff(x) <= 0):
            raise DomainError("scan abscissa must be strictly increasing")
        if np.any((p < 0) | (p > 1)):
            raise DomainError("estimates must lie in [0, 1]")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p_down", p)
        object.__setattr__(self, "sigma", s)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.x.tolist(), self.p_down.tolist(), self.sigma.tolist()))


def _child_seeds(seed, count: int):
    return np.random.SeedSequence(seed).spawn(count)


def _measure(p_true: float, shots: int, det: DetectorModel, child) -> tuple[float, float]:
    hist = simulate_histogram(p_true, shots, det, child)
    return estimate_p_down(hist, det)


def _require_readout(det, seed):
    if det is None:
        raise ConfigError("a DetectorModel is required unless the readout is bypassed")
    if seed is None:
        raise ConfigError("a seed is required for simulated readout")


def run_truth_table(
    model: CouplingModel,
    noise: NoiseConfig | None = None,
    det: DetectorModel | None = None,
    shots: int = 200,
    seed=None,
    bypass_readout: bool = False,
) -> list[tuple[str, float, float]]:
    """Bright fraction after the gate for each computational basis input."""
    if not bypass_readout:
        _require_readout(det, seed)
        children = _child_seeds(seed, len(TRUTH_TABLE_INPUTS))
    rows = []
    for i, recipe in enumerate(TRUTH_TABLE_INPUTS):
        state = prep(recipe, model, noise)
        state = cnot(state, model)
        if noise is not None and not math.isinf(noise.tau):
            state = apply_contrast_decay(state, model.gate_time(), noise)
        if bypass_readout:
            rows.append((recipe, state.p_down(), 0.0))
        else:
            est, sig = _measure(state.p_down(), shots, det, children[i])
            rows.append((recipe, est, sig))
    return rows


def run_rabi_scan(
    model: CouplingModel,
    times,
    noise: NoiseConfig | None = None,
    det: DetectorModel | None = None,
    shots: int = 200,
    seed=None,
    bypass_readout: bool = False,
    prep_pulses_override: list[PulseSpec] | None = None,
) -> ScanCurve:
    """Drive the carrier for each duration starting from the equal superposition.

    The ideal curve is (cos^2(O00 t) + sin^2(O22 t)) / 2; with a finite decay
    constant the oscillating part is damped to
    1/2 + exp(-t / tau) (cos(2 O00 t) - cos(2 O22 t)) / 4.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(times < 0):
        raise DomainError("scan times must be non-negative")
    if not bypass_readout:
        _require_readout(det, seed)
        children = _child_seeds(seed, times.size)
    if prep_pulses_override is not None:
        start = prep("down0", model, noise)
        start = apply_sequence(start, prep_pulses_override, model, noise)
    else:
        start = prep("superposition", model, noise)
    noisy = noise is not None and not math.isinf(noise.tau)
    estimates = np.empty(times.size)
    sigmas = np.zeros(times.size)
    for i, t in enumerate(times):
        drive = PulseSpec(0, float(t), 0.0)
        if noisy:
            state = apply_pulse_with_contrast_loss(start, drive, model, noise)
        else:
            state = apply_pulse(start, drive, model)
        p_true = state.p_down()
        if bypass_readout:
            estimates[i] = p_true
        else:
            estimates[i], sigmas[i] = _measure(p_true, shots, det, children[i])
    return ScanCurve(times, estimates, sigmas)


def run_fringe_scan(
    model: CouplingModel,
    phases,
    coherent: bool = True,
    noise: NoiseConfig | None = None,
    det: DetectorModel | None = None,
    shots: int = 200,
    seed=None,
    bypass_readout: bool = False,
) -> ScanCurve:
    """Interferometric phase scan through prep, gate, and analysis pulse.

    With ``coherent=False`` the state after the gate is replaced by the fully
    dephased mixture before the analysis pulse, which removes all phase
    sensitivity; the ideal coherent response is (1 - cos(phi)) / 2.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size == 0:
        raise DomainError("at least one phase is required")
    if phases.size > 1 and phases[-1] - phases[0] < math.pi:
        raise DomainError("phase scan should cover at least half a period")
    if not bypass_readout:
        _require_readout(det, seed)
        children = _child_seeds(seed, phases.size)
    analysis = area_pulse(+2, 0.5 * math.pi, 0.0, model, 0)
    noisy = noise is not None and not math.isinf(noise.tau)
    estimates = np.empty(phases.size)
    sigmas = np.zeros(phases.size)
    for i, phi in enumerate(phases):
        state = prep("phase-state", model, noise, phase=float(phi))
        state = cnot(state, model)
        if noisy:
            state = apply_contrast_decay(state, model.gate_time(), noise)
        if not coherent:
            state = dephase_spin_coherences(state)
        state = apply_pulse(state, analysis, model)
        if noisy:
            state = apply_contrast_decay(state, analysis.duration, noise)
        p_true = state.p_down()
        if bypass_readout:
            estimates[i] = p_true
        else:
            estimates[i], sigmas[i] = _measure(p_true, shots, det, children[i])
    return ScanCurve(phases, estimates, sigmas)

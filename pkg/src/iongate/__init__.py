"""Simulator of a single trapped-ion spin-motion register.

The package covers the full experimental chain for a conditional gate whose
logic rides on the wave-packet suppression of carrier Rabi rates: state
preparation with carrier and sideband pulses, gate dynamics with optional
contrast decay, off-resonant level-shift and leakage analysis, fluorescence
readout with maximum-likelihood estimation, and the scan experiments with
their curve fits.
"""

from .coupling import CouplingModel, carrier_ratio_for_eta, eta_for_ratio, gate_time, laguerre, lamb_dicke
from .errors import (
    ConfigError,
    DegeneratePulseError,
    DomainError,
    FitError,
    StrongCouplingError,
    TruncationError,
    UnidentifiableError,
)
from .experiments import (
    IDEAL_TRUTH_TABLE,
    TRUTH_TABLE_INPUTS,
    ScanCurve,
    run_fringe_scan,
    run_rabi_scan,
    run_truth_table,
)
from .fitting import FitResult, fit_double_sine_decay, fit_fringe
from .pulses import (
    GateRatioWarning,
    NoiseConfig,
    PulseSpec,
    apply_area,
    apply_contrast_decay,
    apply_pulse,
    apply_pulse_with_contrast_loss,
    apply_sequence,
    area_pulse,
    cnot,
    dephase_spin_coherences,
    prep,
    prep_pulses,
    pulses_from_json,
    pulses_to_json,
    spin_flip,
)
from .readout import (
    CountHistogram,
    DetectorModel,
    estimate_from_references,
    estimate_p_down,
    expected_sigma,
    simulate_histogram,
)
from .spectator import (
    dressed_hamiltonian,
    exact_shifts,
    fit_power_law,
    leakage_scan,
    model_at_speed,
    perturbative_shift,
    propagate_exact,
    shift_table,
)
from .states import (
    BasisLabel,
    IonState,
    Spin,
    basis_index,
    check_truncation,
    fidelity,
    new_basis_state,
    state_from_json,
    to_json_dict,
)

__version__ = "0.1.0"

import math

import numpy as np
import pytest

from iongate import CouplingModel, IonState, eta_for_ratio

OMEGA_Z = 2 * math.pi * 3.4e6
OMEGA_00 = 2 * math.pi * 92e3


@pytest.fixture(scope="session")
def gate_model():
    """Coupling model tuned to the 4/3 carrier-ratio gate condition."""
    return CouplingModel.from_carrier_rate(
        omega_z=OMEGA_Z, eta=eta_for_ratio(4.0 / 3.0), omega_00=OMEGA_00, n_max=20
    )


@pytest.fixture(scope="session")
def detuned_model():
    """Model at the measured carrier ratio 1.295 instead of the ideal 4/3."""
    return CouplingModel.from_carrier_rate(
        omega_z=OMEGA_Z, eta=eta_for_ratio(1.295), omega_00=OMEGA_00, n_max=20
    )


def random_pure_state(rng: np.random.Generator, n_max: int = 20) -> IonState:
    dim = 2 * (n_max + 1)
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return IonState(vec / np.linalg.norm(vec), n_max)


def random_low_state(rng: np.random.Generator, n_max: int = 20, n_top: int = 4) -> IonState:
    """Random pure state supported on Fock levels <= n_top (truncation-safe)."""
    dim = 2 * (n_max + 1)
    vec = np.zeros(dim, dtype=complex)
    for spin in (0, 1):
        base = spin * (n_max + 1)
        vec[base : base + n_top + 1] = rng.normal(size=n_top + 1) + 1j * rng.normal(size=n_top + 1)
    return IonState(vec / np.linalg.norm(vec), n_max)

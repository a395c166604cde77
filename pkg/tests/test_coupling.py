import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import atomic_mass
from scipy.linalg import expm

from iongate import CouplingModel, DomainError, carrier_ratio_for_eta, eta_for_ratio, lamb_dicke

ETA_43 = eta_for_ratio(4.0 / 3.0)


def exp_ikx_element(eta: float, n: int, m: int, trunc: int = 40) -> float:
    """|<m| exp(i eta (a + a^dag)) |n>| by direct matrix exponentiation."""
    a = np.diag(np.sqrt(np.arange(1, trunc + 1)), 1)
    mat = expm(1j * eta * (a + a.T))
    return float(abs(mat[m, n]))


class TestLambDicke:
    def test_trap_frequency_scaling(self):
        eta1 = lamb_dicke(1e7, 1.5e-26, 2 * math.pi * 3.4e6)
        eta2 = lamb_dicke(1e7, 1.5e-26, 2 * math.pi * 6.8e6)
        assert abs(eta1 / eta2 - math.sqrt(2.0)) < 1e-12

    def test_beryllium_geometry_lands_near_gate_condition(self):
        # counter-ish propagating 313 nm beams on a 9 amu ion at 3.4 MHz
        delta_k = math.sqrt(2.0) * 2 * math.pi / 313e-9
        eta = lamb_dicke(delta_k, 9.0121831 * atomic_mass, 2 * math.pi * 3.4e6)
        assert abs(eta - ETA_43) / ETA_43 < 0.05

    def test_rejects_nonpositive_inputs(self):
        with pytest.raises(DomainError):
            lamb_dicke(1e7, 0.0, 2 * math.pi * 3.4e6)
        with pytest.raises(DomainError):
            lamb_dicke(-1e7, 1.5e-26, 2 * math.pi * 3.4e6)


class TestCarrierRatio:
    def test_identity_across_sweep(self):
        for eta in np.arange(0.05, 0.951, 0.05):
            eta = float(round(eta, 2))
            m = CouplingModel(omega_z=1.0, eta=eta, omega_base=1e-3, n_max=20)
            want = 2.0 / (2.0 - 4.0 * eta**2 + eta**4)
            assert abs(m.carrier_ratio() - want) <= 1e-12 * abs(want)

    def test_eta_for_ratio_against_closed_form(self):
        # smallest root of eta^4 - 4 eta^2 + 1/2 = 0 is eta^2 = (4 - sqrt(14)) / 2
        assert abs(ETA_43**2 - (4.0 - math.sqrt(14.0)) / 2.0) < 1e-13
        assert abs(ETA_43 - 0.359404) < 1e-6

    def test_eta_for_measured_ratio(self):
        eta = eta_for_ratio(1.295)
        closed = math.sqrt(2.0 - math.sqrt(2.0 + 2.0 / 1.295))
        assert abs(eta - closed) < 1e-13
        assert abs(carrier_ratio_for_eta(eta) - 1.295) < 1e-12

    def test_ratio_near_one_gives_tiny_eta(self):
        eta = eta_for_ratio(1.0 + 1e-9)
        assert 0.0 < eta < 1e-3

    def test_ratio_at_or_below_one_rejected(self):
        with pytest.raises(DomainError):
            eta_for_ratio(1.0)
        with pytest.raises(DomainError):
            eta_for_ratio(0.5)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=1.0001, max_value=100.0))
    def test_round_trip(self, ratio):
        # the 1e-14 bisection supports 1e-12 round trips away from the pole,
        # where d(ratio)/d(eta^2) ~ ratio^2 amplifies the solver tolerance
        eta = eta_for_ratio(ratio)
        assert abs(carrier_ratio_for_eta(eta) - ratio) <= 1e-12 * ratio


class TestRabiElements:
    def test_point_particle_limit(self):
        m = CouplingModel(omega_z=1.0, eta=1e-8, omega_base=1e-3, n_max=10)
        for n in range(10):
            assert abs(m.rabi_element(n, n) / m.omega_base - 1.0) < 1e-12
            assert m.rabi_element(n, n + 1) / m.omega_base < 1e-6

    def test_first_sideband_against_exponential_oracle(self):
        m = CouplingModel(omega_z=1.0, eta=0.1, omega_base=1e-3, n_max=20)
        got = m.rabi_element(0, 1) / m.omega_base
        assert abs(got - exp_ikx_element(0.1, 0, 1)) < 1e-10 * got

    @pytest.mark.parametrize("eta", [0.1, ETA_43, 0.5])
    def test_all_elements_against_exponential_oracle(self, eta):
        m = CouplingModel(omega_z=1.0, eta=eta, omega_base=1e-3, n_max=20)
        for n in range(11):
            for k in range(11):
                want = exp_ikx_element(eta, n, k)
                got = m.rabi_element(n, k) / m.omega_base
                assert abs(got - want) <= 1e-10 * max(want, 1e-30)

    @settings(max_examples=50, deadline=None)
    @given(
        st.floats(min_value=0.02, max_value=0.95),
        st.integers(0, 20),
        st.integers(0, 20),
    )
    def test_symmetry(self, eta, n, m):
        model = CouplingModel(omega_z=1.0, eta=eta, omega_base=1e-3, n_max=20)
        assert model.rabi_element(n, m) == model.rabi_element(m, n)

    def test_index_bounds(self):
        m = CouplingModel(omega_z=1.0, eta=0.3, omega_base=1e-3, n_max=10)
        with pytest.raises(DomainError):
            m.rabi_element(0, 11)
        with pytest.raises(DomainError):
            m.rabi_element(-1, 0)


class TestGateTime:
    def test_matches_inverse_carrier_rate(self, gate_model):
        # Omega_00 = 2 pi x 92 kHz  ->  one gate lasts 1/92 kHz = 10.870 us
        assert abs(gate_model.gate_time() - 1.0 / 92e3) < 1e-18

    def test_n2_pulse_area_at_gate_condition(self, gate_model):
        area = gate_model.rabi_element(2, 2) * gate_model.gate_time()
        assert abs(area - 1.5 * math.pi) < 1e-12

    def test_doubling_rate_halves_time(self, gate_model):
        faster = gate_model.at_carrier_rate(2 * gate_model.rabi_element(0, 0))
        assert abs(faster.gate_time() - gate_model.gate_time() / 2) < 1e-18


class TestModelValidation:
    def test_eta_out_of_range(self):
        with pytest.raises(DomainError):
            CouplingModel(omega_z=1.0, eta=1.0, omega_base=1e-3)
        with pytest.raises(DomainError):
            CouplingModel(omega_z=1.0, eta=0.0, omega_base=1e-3)

    def test_drive_must_stay_below_trap_frequency(self):
        with pytest.raises(DomainError):
            CouplingModel(omega_z=1.0, eta=0.3, omega_base=1.0)

    def test_physical_constructor_matches_lamb_dicke(self):
        m = CouplingModel.from_physical(
            delta_k_z=2.8e7, mass=1.5e-26, omega_z=2 * math.pi * 3.4e6, omega_base=1e3
        )
        assert abs(m.eta - lamb_dicke(2.8e7, 1.5e-26, 2 * math.pi * 3.4e6)) < 1e-15

    def test_carrier_rate_constructor_fixes_omega00(self):
        m = CouplingModel.from_carrier_rate(omega_z=1e6, eta=0.36, omega_00=1e3, n_max=12)
        assert abs(m.rabi_element(0, 0) - 1e3) < 1e-9

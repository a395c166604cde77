import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iongate import (
    BasisLabel,
    ConfigError,
    DomainError,
    IonState,
    Spin,
    TruncationError,
    basis_index,
    check_truncation,
    fidelity,
    new_basis_state,
    state_from_json,
    to_json_dict,
)
from conftest import random_pure_state


def test_basis_state_down0():
    s = new_basis_state(("down", 0), 20)
    assert s.amplitude((Spin.DOWN, 0)) == 1.0
    assert np.count_nonzero(s.data) == 1


def test_basis_state_up2():
    s = new_basis_state((Spin.UP, 2), 20)
    assert s.amplitude((Spin.UP, 2)) == 1.0
    assert s.population((Spin.UP, 2)) == 1.0


def test_basis_state_bounds():
    with pytest.raises(ConfigError):
        new_basis_state((Spin.DOWN, 5), 4)
    with pytest.raises(ConfigError):
        new_basis_state((Spin.DOWN, 0), 3)  # n_max too small
    with pytest.raises(DomainError):
        BasisLabel(Spin.DOWN, -1)


def test_basis_ordering_is_spin_major():
    assert basis_index(Spin.DOWN, 0, 20) == 0
    assert basis_index(Spin.DOWN, 20, 20) == 20
    assert basis_index(Spin.UP, 0, 20) == 21
    assert basis_index(Spin.UP, 2, 20) == 23


def test_p_down_basis_and_superposition():
    assert new_basis_state((Spin.DOWN, 0), 20).p_down() == 1.0
    vec = np.zeros(42, dtype=complex)
    vec[basis_index(Spin.DOWN, 0, 20)] = 1 / math.sqrt(2)
    vec[basis_index(Spin.UP, 2, 20)] = 1 / math.sqrt(2)
    s = IonState(vec, 20)
    assert abs(s.p_down() - 0.5) < 1e-12


def test_p_down_mixed_state():
    # equal classical mixture of |down,0> and |up,2>
    rho = 0.5 * (
        new_basis_state((Spin.DOWN, 0), 20).to_density().data
        + new_basis_state((Spin.UP, 2), 20).to_density().data
    )
    assert abs(IonState(rho, 20).p_down() - 0.5) < 1e-12


def test_to_density_projector():
    s = new_basis_state((Spin.DOWN, 0), 20)
    rho = s.to_density()
    assert rho.is_density
    assert abs(rho.purity() - 1.0) < 1e-12
    assert rho.data[0, 0] == 1.0


def test_to_density_off_diagonals():
    vec = np.zeros(42, dtype=complex)
    vec[basis_index(Spin.DOWN, 0, 20)] = 1 / math.sqrt(2)
    vec[basis_index(Spin.DOWN, 2, 20)] = 1 / math.sqrt(2)
    rho = IonState(vec, 20).to_density()
    assert abs(abs(rho.data[0, 2]) - 0.5) < 1e-12


def test_to_density_idempotent():
    rho = new_basis_state((Spin.UP, 1), 20).to_density()
    assert rho.to_density() is rho


def test_fidelity_examples():
    d0 = new_basis_state((Spin.DOWN, 0), 20)
    u0 = new_basis_state((Spin.UP, 0), 20)
    assert fidelity(d0, d0) == 1.0
    assert fidelity(d0, u0) == 0.0
    vec = np.zeros(42, dtype=complex)
    vec[basis_index(Spin.DOWN, 0, 20)] = 1 / math.sqrt(2)
    vec[basis_index(Spin.UP, 2, 20)] = 1 / math.sqrt(2)
    half = IonState(vec, 20)
    assert abs(fidelity(half, d0) - 0.5) < 1e-12


def test_fidelity_mixed_pure_and_errors():
    d0 = new_basis_state((Spin.DOWN, 0), 20)
    u2 = new_basis_state((Spin.UP, 2), 20)
    rho = IonState(0.5 * (d0.to_density().data + u2.to_density().data), 20)
    assert abs(fidelity(d0, rho) - 0.5) < 1e-12
    assert abs(fidelity(rho, d0) - fidelity(d0, rho)) < 1e-15
    with pytest.raises(DomainError):
        fidelity(rho, rho)
    with pytest.raises(DomainError):
        fidelity(d0, new_basis_state((Spin.DOWN, 0), 10))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_density_promotion_preserves_p_down(seed):
    s = random_pure_state(np.random.default_rng(seed))
    assert abs(s.to_density().p_down() - s.p_down()) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_fidelity_symmetric_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a, b = random_pure_state(rng), random_pure_state(rng)
    f = fidelity(a, b)
    assert 0.0 <= f <= 1.0
    assert abs(f - fidelity(b, a)) < 1e-12


def test_invalid_states_rejected():
    with pytest.raises(DomainError):
        IonState(np.ones(42, dtype=complex), 20)  # unnormalized
    rho = np.zeros((42, 42), dtype=complex)
    rho[0, 0] = 1.0
    rho[0, 1] = 0.5  # not Hermitian
    with pytest.raises(DomainError):
        IonState(rho, 20)
    herm = np.zeros((42, 42), dtype=complex)
    herm[0, 0] = 1.5
    herm[1, 1] = -0.5  # negative eigenvalue
    with pytest.raises(DomainError):
        IonState(herm, 20)


def test_states_are_immutable():
    s = new_basis_state((Spin.DOWN, 0), 20)
    with pytest.raises(AttributeError):
        s.n_max = 5
    with pytest.raises(ValueError):
        s.data[0] = 0.0


def test_truncation_guard():
    ok = new_basis_state((Spin.DOWN, 0), 20)
    assert check_truncation(ok) is ok
    with pytest.raises(TruncationError):
        check_truncation(new_basis_state((Spin.DOWN, 20), 20))
    with pytest.raises(TruncationError):
        check_truncation(new_basis_state((Spin.UP, 19), 20))


def test_json_round_trip_pure_and_density():
    rng = np.random.default_rng(3)
    s = random_pure_state(rng, n_max=6)
    back = state_from_json(to_json_dict(s))
    assert np.allclose(back.data, s.data, atol=0, rtol=0)
    rho = s.to_density()
    back = state_from_json(to_json_dict(rho))
    assert back.is_density
    assert np.allclose(back.data, rho.data, atol=0, rtol=0)


def test_json_layout_matches_basis_ordering():
    d = to_json_dict(new_basis_state((Spin.UP, 2), 20))
    assert d["repr"] == "pure"
    assert d["amplitudes"][23] == [1.0, 0.0]
    with pytest.raises(ConfigError):
        state_from_json({"n_max": 20, "repr": "weird", "amplitudes": []})

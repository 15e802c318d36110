"""Photon-number-space oracle, and its agreement with the Gaussian route."""

import math

import numpy as np
import pytest

from swapsim.detection import ClickPattern, DetectorSpec
from swapsim.errors import CapacityError, NumericalDomainError
from swapsim.experiments import (
    InterferenceParams,
    SourceParams,
    build_hom_circuit,
    build_pair_visibility_circuit,
    build_swap_circuit,
)
from swapsim.fock import (
    TRUNCATION_GATE,
    FockState,
    apply_linear_optics_fock,
    oracle_click_probability,
    oracle_pattern_probability,
    oracle_state,
    photon_number_marginal,
    product_fock,
    tmsv_fock,
    tmsv_tail_bound,
    vacuum_fock,
)
from swapsim.gaussian import SymplecticOp, beamsplitter_symplectic, phase_shifter_symplectic


def test_tmsv_amplitudes():
    mu = 0.04
    state = tmsv_fock(mu, 4)
    for n in range(5):
        expected = (-1.0) ** n * math.sqrt(mu**n / (1.0 + mu) ** (n + 1))
        assert state.amps[n, n] == pytest.approx(expected, rel=1e-14)
    off = state.amps[np.eye(5) == 0]
    assert np.all(off == 0)


def test_tmsv_tail_bound_matches_discarded_weight():
    mu, n_max = 0.03, 5
    state = tmsv_fock(mu, n_max)
    kept = float(np.sum(np.abs(state.amps) ** 2))
    assert 1.0 - kept == pytest.approx(tmsv_tail_bound(mu, n_max), rel=1e-12)
    assert state.eps_trunc == tmsv_tail_bound(mu, n_max)


def test_truncation_gate_refuses_heavy_tails():
    with pytest.raises(NumericalDomainError):
        tmsv_fock(0.5, 3)  # tail (1/3)^4 ~ 1.2e-2
    tmsv_fock(0.01, 3)  # tail ~ 9.6e-9 is fine
    with pytest.raises(ValueError):
        tmsv_fock(0.1, 0)
    with pytest.raises(ValueError):
        tmsv_fock(-0.1, 3)


def test_two_photon_coalescence_on_balanced_splitter():
    """|1,1> in, photons always leave together."""
    one = FockState(np.array([0.0, 1.0], dtype=complex))
    state = product_fock([one, one])
    bs = beamsplitter_symplectic(1.0 / math.sqrt(2.0), (0, 1), 2)
    out = apply_linear_optics_fock(state, bs, photon_cap=2)
    w = np.abs(out.amps) ** 2
    assert w[1, 1] < 1e-12
    assert w[2, 0] == pytest.approx(0.5, rel=1e-12)
    assert w[0, 2] == pytest.approx(0.5, rel=1e-12)
    assert out.norm() == pytest.approx(1.0, rel=1e-12)


def test_phase_multiplies_number_ladder():
    amps = np.array([0.5, 0.5, math.sqrt(0.5)], dtype=complex)
    state = FockState(amps)
    theta = 0.7
    out = apply_linear_optics_fock(state, phase_shifter_symplectic(theta, 0, 1), 2)
    expected = amps * np.exp(1j * theta * np.arange(3))
    assert np.allclose(out.amps, expected, atol=1e-14)


def test_squeezer_rejected_in_photon_space():
    state = vacuum_fock(1)
    squeeze = SymplecticOp(np.diag([2.0, 0.5]))
    with pytest.raises(ValueError, match="passive"):
        apply_linear_optics_fock(state, squeeze, 2)


def test_identity_beamsplitter_is_a_no_op():
    state = tmsv_fock(0.01, 3)
    bs = beamsplitter_symplectic(1.0, (0, 1), 2)
    out = apply_linear_optics_fock(state, bs, 6)
    assert out is state


def test_photon_number_marginal_is_geometric():
    mu = 0.05
    state = tmsv_fock(mu, 6)
    marginal = photon_number_marginal(state, 0)
    for n in range(7):
        assert marginal[n] == pytest.approx(mu**n / (1.0 + mu) ** (n + 1), rel=1e-12)


def test_oracle_capacity_guard():
    amps = np.zeros((8,) * 2 + (1,) * 10, dtype=complex)
    amps[(7, 7) + (0,) * 10] = 1.0
    state = FockState(amps)
    # chain splitters to spread the 14 photons across every axis; the
    # tensor would need 15^12 amplitudes well before the chain finishes
    with pytest.raises(CapacityError):
        for j in range(1, 12):
            state = apply_linear_optics_fock(
                state, beamsplitter_symplectic(1.0 / math.sqrt(2.0), (j - 1, j), 12), 14
            )


def test_oracle_click_probability_single_thermal_arm():
    """Click on one arm of a pair source: 1 - P(vacuum) = mu/(1+mu)."""
    mu = 0.02
    state = tmsv_fock(mu, 6)
    detectors = {"D": DetectorSpec("D", (0,))}
    p = oracle_click_probability(state, ClickPattern(frozenset({"D"})), detectors)
    assert p == pytest.approx(mu / (1.0 + mu), abs=2e-11)


def test_oracle_click_probability_with_detection_loss():
    mu = 0.05
    state = tmsv_fock(mu, 8)
    detectors = {"D": DetectorSpec("D", (0,))}
    eta = 0.37
    p = oracle_click_probability(
        state, ClickPattern(frozenset({"D"})), detectors, loss={"D": eta}
    )
    # thermal arm behind loss eta is thermal with mean eta*mu
    assert p == pytest.approx(eta * mu / (1.0 + eta * mu), abs=1e-9)


def test_oracle_refuses_untrusted_truncation():
    state = FockState(np.ones((2, 2), dtype=complex) / 2.0, eps_trunc=1e-3)
    detectors = {"D": DetectorSpec("D", (0,))}
    with pytest.raises(NumericalDomainError):
        oracle_click_probability(state, ClickPattern(frozenset({"D"})), detectors)


# ---------------------------------------------------------------------------
# Route agreement: the same circuits through both state representations


def _assert_routes_agree(circuit, n_max, slack=10.0):
    for name in circuit.patterns:
        gaussian = circuit.pattern_probability(name)
        fock, eps = oracle_pattern_probability(circuit, name, n_max=n_max)
        assert gaussian == pytest.approx(fock, abs=slack * max(eps, 1e-14)), name


def test_routes_agree_on_interference_circuit():
    # lossless idler arms keep the loss-ancilla count (and tensor) small
    src = SourceParams(0.002, 0.0025, 1.0, 0.8, 0.85, 1.0)
    for zeta in (1.0, 0.6):
        circuit = build_hom_circuit(src, InterferenceParams(zeta=zeta))
        _assert_routes_agree(circuit, n_max=2)


def test_routes_agree_on_pair_circuit():
    for theta in (0.0, 1.3):
        circuit = build_pair_visibility_circuit(
            0.004, 0.9, 0.8, theta=theta
        )
        _assert_routes_agree(circuit, n_max=3)


def test_routes_agree_on_swap_circuit():
    src = SourceParams(0.003, 0.004)
    circuit = build_swap_circuit(src, InterferenceParams(zeta=1.0, theta_a=0.4))
    _assert_routes_agree(circuit, n_max=2)


def test_oracle_unknown_pattern():
    circuit = build_hom_circuit(SourceParams(0.01, 0.01), InterferenceParams())
    with pytest.raises(ValueError):
        oracle_pattern_probability(circuit, "nope")

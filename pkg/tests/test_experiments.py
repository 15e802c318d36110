"""Circuit builders: wiring, fringe structure, and flux bookkeeping."""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapsim.errors import ConfigError
from swapsim.experiments import (
    HOM_OPERATING_POINT,
    SWAP_OPERATING_POINT,
    CircuitModel,
    InterferenceParams,
    SourceParams,
    TmsvSource,
    build_hom_circuit,
    build_pair_visibility_circuit,
    build_swap_circuit,
    delay_to_indistinguishability,
    source_sweep_mu_a,
    source_sweep_mu_b,
)
from swapsim.gaussian import mean_photon_numbers

small_mu = st.floats(1e-4, 0.05)
any_eta = st.floats(0.05, 1.0)
any_zeta = st.floats(0.0, 1.0)


# ---------------------------------------------------------------------------
# Parameter containers


def test_source_params_validation():
    with pytest.raises(ConfigError):
        SourceParams(-0.1, 0.1)
    with pytest.raises(ConfigError):
        SourceParams(0.1, 0.1, eta_ai=1.2)
    with pytest.raises(ConfigError):
        InterferenceParams(zeta=1.5)


def test_operating_points_pinned():
    assert HOM_OPERATING_POINT == SourceParams(0.019, 0.015, 0.067, 0.10, 0.11, 0.072)
    assert SWAP_OPERATING_POINT == SourceParams(
        0.0047, 0.0042, 0.017, 0.048, 0.066, 0.020
    )
    assert source_sweep_mu_a(0.2).mu_b == 0.0046
    assert source_sweep_mu_b(0.2).mu_a == 0.0039


def test_duplicate_source_mode_rejected():
    circuit = build_hom_circuit(SourceParams(0.1, 0.1), InterferenceParams())
    with pytest.raises(ValueError):
        CircuitModel(
            circuit.layout,
            (TmsvSource(0, 1, 0.1), TmsvSource(1, 2, 0.1)),
            circuit.steps,
            circuit.detectors,
            circuit.patterns,
            circuit.detector_bin_ps,
        )


# ---------------------------------------------------------------------------
# Interference register


def test_hom_circuit_shape():
    circuit = build_hom_circuit(SourceParams(0.02, 0.02), InterferenceParams())
    assert set(circuit.patterns) == {"P21", "P521", "P217", "P5217"}
    assert set(circuit.detectors) == {"D1", "D2", "D5", "D7"}
    state = circuit.final_state()
    assert np.allclose(state.displacement, 0.0)


@given(mu=small_mu, eta=any_eta, zeta=any_zeta)
@settings(max_examples=25, deadline=None)
def test_threefold_symmetry_under_equal_sources(mu, eta, zeta):
    """With equal gains and efficiencies the two herald choices coincide."""
    src = SourceParams(mu, mu, eta, eta, eta, eta)
    circuit = build_hom_circuit(src, InterferenceParams(zeta=zeta))
    probs = circuit.all_pattern_probabilities()
    assert probs["P521"] == pytest.approx(probs["P217"], rel=1e-8, abs=1e-14)


def test_zeta_one_leaves_mismatched_modes_dark():
    circuit = build_hom_circuit(
        SourceParams(0.05, 0.04, 0.9, 0.8, 0.7, 0.6), InterferenceParams(zeta=1.0)
    )
    photons = mean_photon_numbers(circuit.final_state())
    mismatched = circuit.layout.find(channel="mismatched")
    assert mismatched
    assert np.max(np.abs(photons[mismatched])) < 1e-12


@given(mu=st.floats(1e-4, 6e-4), eta=st.floats(0.0, 0.1), zeta=any_zeta)
@settings(max_examples=30, deadline=None)
def test_central_click_sum_constant_at_low_flux(mu, eta, zeta):
    """The overlap splitter redistributes flux between the matched and
    mismatched paths without absorbing any, so the summed click
    probability of the two central detectors cannot depend on zeta once
    multi-photon bunching is negligible."""
    from swapsim.detection import ClickPattern, click_pattern_probability

    src = SourceParams(mu, mu, eta, eta, eta, eta)

    def singles(z):
        circuit = build_hom_circuit(src, InterferenceParams(zeta=z))
        state = circuit.final_state()
        return sum(
            click_pattern_probability(state, ClickPattern(frozenset({d})), circuit.detectors)
            for d in ("D1", "D2")
        )

    # residual bunching bound: 2 (mu eta)^2 t^2 r^2 <= (6e-5)^2 / 2
    assert singles(zeta) == pytest.approx(singles(1.0), abs=2e-9)


@given(mu=st.floats(1e-3, 0.05), eta=st.floats(0.1, 1.0), zeta=any_zeta)
@settings(max_examples=30, deadline=None)
def test_central_photon_flux_exactly_conserved(mu, eta, zeta):
    """Mean photon number summed over the central detectors' mode unions
    is exactly zeta-independent (bunching moves clicks, not photons)."""
    src = SourceParams(mu, mu / 2, eta, eta, eta / 2, eta)

    def flux(z):
        circuit = build_hom_circuit(src, InterferenceParams(zeta=z))
        photons = mean_photon_numbers(circuit.final_state())
        modes = sorted(
            set(circuit.detectors["D1"].modes) | set(circuit.detectors["D2"].modes)
        )
        return float(np.sum(photons[modes]))

    assert flux(zeta) == pytest.approx(flux(1.0), rel=1e-12, abs=1e-15)


def _central_singles_sum(src, zeta, tau):
    from swapsim.detection import ClickPattern, click_pattern_probability

    circuit = build_hom_circuit(src, InterferenceParams(zeta=zeta, tau_c=tau))
    state = circuit.final_state()
    return sum(
        click_pattern_probability(state, ClickPattern(frozenset({d})), circuit.detectors)
        for d in ("D1", "D2")
    )


def test_click_sum_deviation_is_the_bunching_term():
    """At finite flux the central click sum does move with zeta, by the
    two-photon bunching weight 2 m_A m_B t^2 r^2 (1 - zeta^2)."""
    mu, eta, zeta, tau = 0.005, 0.3, 0.4, 0.6
    src = SourceParams(mu, mu, eta, eta, eta, eta)
    m = eta * mu
    predicted = 2.0 * m * m * tau**2 * (1 - tau**2) * (1 - zeta**2)
    deviation = _central_singles_sum(src, zeta, tau) - _central_singles_sum(src, 1.0, tau)
    assert deviation == pytest.approx(predicted, rel=0.02)


def test_click_sum_deviation_scales_with_overlap():
    """Even at high flux the zeta dependence enters purely through
    1 - zeta^2 (to the sub-percent level)."""
    src = SourceParams(0.08, 0.08, 0.9, 0.9, 0.9, 0.9)
    base = _central_singles_sum(src, 0.0, 0.6) - _central_singles_sum(src, 1.0, 0.6)
    for zeta in (0.3, 0.6, 0.9):
        dev = _central_singles_sum(src, zeta, 0.6) - _central_singles_sum(src, 1.0, 0.6)
        assert dev / (1 - zeta**2) == pytest.approx(base, rel=5e-3)


# ---------------------------------------------------------------------------
# Swapping register


def test_swap_circuit_is_32_dimensional():
    state = build_swap_circuit(SWAP_OPERATING_POINT, InterferenceParams()).final_state()
    assert state.covariance.shape == (32, 32)


def test_swap_patterns_and_bins():
    circuit = build_swap_circuit(SWAP_OPERATING_POINT, InterferenceParams())
    assert set(circuit.patterns) == {
        "P1467",
        "P1465",
        "P3467",
        "P3465",
        "P1287",
        "P1285",
        "P3287",
        "P3285",
    }
    assert circuit.detector_bin_ps["D4"] == 0
    assert circuit.detector_bin_ps["D2"] == 0
    assert circuit.detector_bin_ps["D6"] == 346
    assert circuit.detector_bin_ps["D8"] == 346


@given(
    theta_a=st.floats(0.0, 2 * math.pi),
    shift=st.floats(0.0, 2 * math.pi),
)
@settings(max_examples=15, deadline=None)
def test_swap_fringe_depends_on_phase_difference(theta_a, shift):
    """With matched analysis splitters only theta_A - theta_B matters."""
    src = SourceParams(0.01, 0.012, 0.5, 0.6, 0.7, 0.8)

    def p(a, b):
        intf = InterferenceParams(zeta=0.9, theta_a=a, theta_b=b)
        return build_swap_circuit(src, intf).pattern_probability("P1467")

    assert p(theta_a, 0.3) == pytest.approx(p(theta_a + shift, 0.3 + shift), abs=1e-10)


def test_port_pairings_split_into_two_phase_groups():
    """Complementary analysis ports put the fringe maximum at 0 or pi."""
    src = SourceParams(0.008, 0.009)
    intf0 = InterferenceParams(zeta=1.0, theta_a=0.0)
    intfpi = InterferenceParams(zeta=1.0, theta_a=math.pi)
    at0 = build_swap_circuit(src, intf0).all_pattern_probabilities()
    atpi = build_swap_circuit(src, intfpi).all_pattern_probabilities()
    in_phase = ("P1467", "P3465", "P1287", "P3285")
    anti_phase = ("P1465", "P3467", "P1285", "P3287")
    for name in in_phase:
        assert at0[name] > atpi[name]
    for name in anti_phase:
        assert at0[name] < atpi[name]


def test_mirrored_heralds_give_the_same_fringe():
    """Both herald orderings announce the same state, so their fringes
    coincide point for point (up to inclusion-exclusion rounding)."""
    src = SourceParams(0.006, 0.005, 0.3, 0.4, 0.5, 0.6)
    for theta in (0.0, 1.1, math.pi):
        probs = build_swap_circuit(
            src, InterferenceParams(zeta=0.8, theta_a=theta)
        ).all_pattern_probabilities()
        assert probs["P1467"] == pytest.approx(probs["P1287"], abs=1e-13)
        assert probs["P3465"] == pytest.approx(probs["P3285"], abs=1e-13)


# ---------------------------------------------------------------------------
# Pair-visibility register


def test_pair_visibility_port_phases():
    mu = 0.02
    for theta in (0.0, 0.7, 2.0):
        probs = build_pair_visibility_circuit(mu, theta=theta).all_pattern_probabilities()
        mirrored = build_pair_visibility_circuit(
            mu, theta=theta + math.pi
        ).all_pattern_probabilities()
        # swapping one output port is a half-period shift of the fringe
        assert probs["P13"] == pytest.approx(mirrored["P14"], rel=1e-9)
        assert probs["P23"] == pytest.approx(mirrored["P24"], rel=1e-9)


def test_pair_visibility_fringe_is_nearly_sinusoidal():
    """Multi-pair emission adds harmonics, but they vanish linearly in mu."""

    def harmonic_ratio(mu):
        thetas = np.linspace(0.0, 2 * math.pi, 16, endpoint=False)
        values = [
            build_pair_visibility_circuit(mu, theta=t).pattern_probability("P13")
            for t in thetas
        ]
        spectrum = np.abs(np.fft.rfft(values))
        return spectrum[2] / spectrum[1]

    assert harmonic_ratio(0.015) < 5e-3
    assert harmonic_ratio(0.0015) < 5e-4


def test_delay_to_indistinguishability_values():
    assert delay_to_indistinguishability(0.0) == 1.0
    z = delay_to_indistinguishability(25.0 * math.sqrt(2.0), 25.0)
    assert z**2 == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert delay_to_indistinguishability(1e6, 25.0) == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(ConfigError):
        delay_to_indistinguishability(10.0, 0.0)
    with pytest.raises(ConfigError):
        delay_to_indistinguishability(0.0, -3.0)

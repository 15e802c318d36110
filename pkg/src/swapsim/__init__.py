"""Simulation and analysis of time-bin entanglement swapping with threshold detectors."""

from .analysis import (
    ChshResult,
    FitResult,
    QkdBudget,
    VisibilityResult,
    binary_entropy,
    chsh_parameter,
    closed_form_visibility,
    ent_visibility,
    fidelity_from_visibility,
    fit_hom_dip,
    fit_sinusoid,
    hom_visibility,
    infer_zeta,
    key_rate_from_visibility,
    klyshko_estimate,
    phase_error_from_visibility,
    secret_key_fraction,
    swap_visibility,
    taylor_visibility,
)
from .detection import ClickPattern, DetectorSpec, click_pattern_probability, pattern_distribution
from .errors import (
    CapacityError,
    ConfigError,
    FitError,
    NumericalDomainError,
    SwapSimError,
)
from .experiments import (
    HOM_OPERATING_POINT,
    SWAP_OPERATING_POINT,
    CircuitModel,
    InterferenceParams,
    SourceParams,
    build_hom_circuit,
    build_pair_visibility_circuit,
    build_swap_circuit,
    delay_to_indistinguishability,
    source_sweep_mu_a,
    source_sweep_mu_b,
)
from .fock import oracle_pattern_probability, oracle_state
from .gaussian import GaussianState, SymplecticOp, tmsv_state, vacuum_probability

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ChshResult",
    "CircuitModel",
    "ClickPattern",
    "ConfigError",
    "DetectorSpec",
    "FitError",
    "FitResult",
    "GaussianState",
    "HOM_OPERATING_POINT",
    "InterferenceParams",
    "NumericalDomainError",
    "QkdBudget",
    "SWAP_OPERATING_POINT",
    "SourceParams",
    "SwapSimError",
    "SymplecticOp",
    "VisibilityResult",
    "binary_entropy",
    "build_hom_circuit",
    "build_pair_visibility_circuit",
    "build_swap_circuit",
    "chsh_parameter",
    "click_pattern_probability",
    "closed_form_visibility",
    "delay_to_indistinguishability",
    "ent_visibility",
    "fidelity_from_visibility",
    "fit_hom_dip",
    "fit_sinusoid",
    "hom_visibility",
    "infer_zeta",
    "key_rate_from_visibility",
    "klyshko_estimate",
    "oracle_pattern_probability",
    "oracle_state",
    "pattern_distribution",
    "phase_error_from_visibility",
    "secret_key_fraction",
    "source_sweep_mu_a",
    "source_sweep_mu_b",
    "swap_visibility",
    "taylor_visibility",
    "tmsv_state",
    "vacuum_probability",
]

"""Circuit builders for the interference experiments.

Three registers are modeled, all made of two-mode squeezed vacuum
sources, loss channels, beamsplitters and phase shifters:

* a Hong-Ou-Mandel register: two independent sources send their signal
  modes onto a central beamsplitter while the idlers are detected
  directly;
* an entanglement-swapping register: each source emits into an early
  and a late time bin, the signals meet at the central station, and the
  idlers are analyzed in unbalanced interferometers that close the
  time-bin qubit;
* a single-source visibility register used to characterize one source's
  time-bin entanglement on its own.

Partial indistinguishability of the two sources' photons is modeled by
splitting every signal entering the central station on a virtual
beamsplitter of amplitude transmittance ``sqrt(zeta)``: the transmitted
part lives in the common temporal mode, the reflected part in a
per-party orthogonal mode that still reaches the same physical
detectors (through its own copy of the central beamsplitter) but never
interferes with the other party's light.  The field overlap between the
two parties is then ``zeta`` and interference visibilities scale as
``zeta**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .detection import ClickPattern, DetectorSpec, click_pattern_probability, validate_registry
from .errors import ConfigError
from .gaussian import (
    GaussianState,
    ModeLabel,
    ModeLayout,
    SymplecticOp,
    apply_loss,
    apply_symplectic,
    beamsplitter_symplectic,
    phase_shifter_symplectic,
    tmsv_state,
)

__all__ = [
    "BALANCED",
    "SourceParams",
    "InterferenceParams",
    "TmsvSource",
    "LossStep",
    "CircuitModel",
    "evaluate",
    "build_hom_circuit",
    "build_swap_circuit",
    "build_pair_visibility_circuit",
    "delay_to_indistinguishability",
    "HOM_OPERATING_POINT",
    "SWAP_OPERATING_POINT",
    "source_sweep_mu_a",
    "source_sweep_mu_b",
]

# amplitude transmittance of a 50/50 splitter
BALANCED = 1.0 / math.sqrt(2.0)

# Nominal timing of the deployed system: 200 MHz clock and 346 ps
# separation between the early and late bins.  Detection events in the
# late bin (and at the interferometer outputs, which project onto the
# middle of the three output bins) land this far into the gate.
CLOCK_RATE_HZ = 2.0e8
BIN_SEPARATION_PS = 346
GATE_PERIOD_PS = 5000


@dataclass(frozen=True)
class SourceParams:
    """Mean pair numbers and heralding efficiencies of the two sources.

    ``mu_a``/``mu_b`` are mean photon pairs per mode (per time bin for
    the swapping register), ``eta_*`` the end-to-end transmission of
    each arm from the crystal to its detector.
    """

    mu_a: float
    mu_b: float
    eta_ai: float = 1.0
    eta_as: float = 1.0
    eta_bs: float = 1.0
    eta_bi: float = 1.0

    def __post_init__(self):
        for name in ("mu_a", "mu_b"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        for name in ("eta_ai", "eta_as", "eta_bs", "eta_bi"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class InterferenceParams:
    """Settings of the central station and the analysis interferometers.

    ``zeta`` is the modal field overlap between the two parties' photons
    at the central beamsplitter (1 means perfectly indistinguishable; it
    enters every visibility as ``zeta**2``).  ``tau_c`` is the central
    beamsplitter's amplitude transmittance; ``theta_a``/``theta_b`` and
    ``tau_a``/``tau_b`` the phase and splitting of the two analysis
    interferometers (used by the swapping and single-source registers
    only).
    """

    zeta: float = 1.0
    tau_c: float = BALANCED
    theta_a: float = 0.0
    theta_b: float = 0.0
    tau_a: float = BALANCED
    tau_b: float = BALANCED

    def __post_init__(self):
        if not 0.0 <= self.zeta <= 1.0:
            raise ConfigError(f"zeta must lie in [0, 1], got {self.zeta}")
        for name in ("tau_c", "tau_a", "tau_b"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")


# Measured operating points of the deployed system (HOM run and
# swapping run), and the two pump-power sweeps where one source's mean
# pair number is varied while everything else stays fixed.
HOM_OPERATING_POINT = SourceParams(
    mu_a=0.019, mu_b=0.015, eta_ai=0.067, eta_as=0.10, eta_bs=0.11, eta_bi=0.072
)
SWAP_OPERATING_POINT = SourceParams(
    mu_a=0.0047, mu_b=0.0042, eta_ai=0.017, eta_as=0.048, eta_bs=0.066, eta_bi=0.020
)


def source_sweep_mu_a(mu_a: float) -> SourceParams:
    """Operating point of the sweep where source A's pump power varies."""
    return SourceParams(
        mu_a=mu_a, mu_b=0.0046, eta_ai=0.026, eta_as=0.072, eta_bs=0.076, eta_bi=0.022
    )


def source_sweep_mu_b(mu_b: float) -> SourceParams:
    """Operating point of the sweep where source B's pump power varies."""
    return SourceParams(
        mu_a=0.0039, mu_b=mu_b, eta_ai=0.031, eta_as=0.078, eta_bs=0.076, eta_bi=0.022
    )


@dataclass(frozen=True)
class TmsvSource:
    """One two-mode squeezed vacuum feeding a (signal, idler) mode pair."""

    signal: int
    idler: int
    mu: float


@dataclass(frozen=True)
class LossStep:
    """Pure loss of transmission ``eta`` on one mode."""

    mode: int
    eta: float


Step = Union[LossStep, SymplecticOp]


@dataclass(frozen=True)
class CircuitModel:
    """A full experiment: initial sources, optical steps, detectors, patterns.

    The ``steps`` tuple is replayable — loss steps carry (mode, eta) and
    symplectic steps carry their construction recipe — which is what
    lets an independent photon-number backend re-run the same circuit.
    ``detector_bin_ps`` records where in the detection gate each
    detector's events land, for time-tag synthesis.
    """

    layout: ModeLayout
    sources: tuple[TmsvSource, ...]
    steps: tuple[Step, ...]
    detectors: Mapping[str, DetectorSpec]
    patterns: Mapping[str, ClickPattern]
    detector_bin_ps: Mapping[str, int]

    def __post_init__(self):
        validate_registry(self.detectors)
        fed = [s.signal for s in self.sources] + [s.idler for s in self.sources]
        if len(set(fed)) != len(fed):
            raise ValueError("a mode is fed by two sources")

    @property
    def num_modes(self) -> int:
        return len(self.layout)

    def initial_state(self) -> GaussianState:
        """Sources in their slots, vacuum everywhere else."""
        gamma = np.eye(2 * self.num_modes)
        for src in self.sources:
            cov = tmsv_state(src.mu).covariance
            s, i = src.signal, src.idler
            for (r, br) in ((s, 0), (i, 1)):
                for (c, bc) in ((s, 0), (i, 1)):
                    gamma[2 * r : 2 * r + 2, 2 * c : 2 * c + 2] = cov[
                        2 * br : 2 * br + 2, 2 * bc : 2 * bc + 2
                    ]
        return GaussianState(gamma)

    def final_state(self) -> GaussianState:
        return evaluate(self)

    def pattern_probability(self, name: str, state: GaussianState | None = None) -> float:
        if state is None:
            state = self.final_state()
        return click_pattern_probability(state, self.patterns[name], self.detectors)

    def all_pattern_probabilities(self) -> dict[str, float]:
        state = self.final_state()
        return {name: self.pattern_probability(name, state) for name in self.patterns}


def evaluate(circuit: CircuitModel) -> GaussianState:
    """Run every step and sanity-check the result against the uncertainty bound."""
    state = circuit.initial_state()
    for step in circuit.steps:
        if isinstance(step, LossStep):
            state = apply_loss(state, step.mode, step.eta)
        else:
            state = apply_symplectic(state, step)
    state.assert_physical()
    return state


def delay_to_indistinguishability(delay_ps: float, coherence_sigma_ps: float = 25.0) -> float:
    """Field overlap of two Gaussian wavepackets offset by ``delay_ps``.

    ``exp(-dt^2 / (4 sigma^2))`` for packets of temporal standard
    deviation ``sigma``; feeding the result into ``InterferenceParams.zeta``
    turns a mechanical delay scan into a visibility scan.
    """
    if coherence_sigma_ps <= 0:
        raise ConfigError("coherence sigma must be positive")
    return math.exp(-(delay_ps**2) / (4.0 * coherence_sigma_ps**2))


def _overlap_split(n: int, zeta: float, signal: int, mismatched: int) -> SymplecticOp:
    # route sqrt(zeta) of the field into the common mode, the rest into
    # the party's private mode
    return beamsplitter_symplectic(math.sqrt(zeta), (signal, mismatched), n)


def _central_station(
    n: int,
    tau_c: float,
    sig_a: int,
    sig_b: int,
    mm_a: int,
    aux_a: int,
    mm_b: int,
    aux_b: int,
) -> list[SymplecticOp]:
    """The central beamsplitter and its two shadow copies.

    The matched components interfere on the main splitter.  Each
    mismatched component crosses an identical splitter paired with
    vacuum, so that it reaches both output detectors with the same
    splitting ratio as the matched light: party A's transmitted fraction
    heads to output 1, party B's to output 2.
    """
    return [
        beamsplitter_symplectic(tau_c, (sig_a, sig_b), n),
        beamsplitter_symplectic(tau_c, (mm_a, aux_a), n),
        beamsplitter_symplectic(tau_c, (mm_b, aux_b), n),
    ]


def _analysis_interferometer(
    n: int, early: int, late: int, theta: float, tau: float
) -> list[SymplecticOp]:
    """Unbalanced interferometer closing a time-bin qubit.

    Phase ``theta`` on the late bin, then the recombining splitter; the
    ``early`` slot afterwards is output port 1, the ``late`` slot output
    port 2 (both land in the interfering middle bin in real time tags).
    """
    return [
        phase_shifter_symplectic(theta, late, n),
        beamsplitter_symplectic(tau, (early, late), n),
    ]


def build_hom_circuit(
    source: SourceParams, interference: InterferenceParams
) -> CircuitModel:
    """Two sources, central station on the signals, idlers detected directly.

    Detectors: D1 and D2 are the central station outputs, D5 is party
    A's idler, D7 party B's idler.  Patterns: the signal-signal
    coincidence P21, the two threefolds P521 and P217 that additionally
    herald on one idler, and the fourfold P5217.
    """
    labels = [
        ModeLabel("alice", "signal"),
        ModeLabel("alice", "idler"),
        ModeLabel("bob", "signal"),
        ModeLabel("bob", "idler"),
        ModeLabel("alice", "mismatched"),
        ModeLabel("alice", "aux"),
        ModeLabel("bob", "mismatched"),
        ModeLabel("bob", "aux"),
    ]
    layout = ModeLayout(labels)
    n = len(layout)
    AS, AI, BS, BI, MMA, AUXA, MMB, AUXB = range(8)

    sources = (
        TmsvSource(signal=AS, idler=AI, mu=source.mu_a),
        TmsvSource(signal=BS, idler=BI, mu=source.mu_b),
    )
    steps: list[Step] = [
        LossStep(AS, source.eta_as),
        LossStep(AI, source.eta_ai),
        LossStep(BS, source.eta_bs),
        LossStep(BI, source.eta_bi),
        _overlap_split(n, interference.zeta, AS, MMA),
        _overlap_split(n, interference.zeta, BS, MMB),
        *_central_station(n, interference.tau_c, AS, BS, MMA, AUXA, MMB, AUXB),
    ]
    detectors = {
        "D1": DetectorSpec("D1", frozenset({AS, MMA, AUXB})),
        "D2": DetectorSpec("D2", frozenset({BS, AUXA, MMB})),
        "D5": DetectorSpec("D5", frozenset({AI})),
        "D7": DetectorSpec("D7", frozenset({BI})),
    }
    patterns = {
        "P21": ClickPattern(frozenset({"D2", "D1"})),
        "P521": ClickPattern(frozenset({"D5", "D2", "D1"})),
        "P217": ClickPattern(frozenset({"D2", "D1", "D7"})),
        "P5217": ClickPattern(frozenset({"D5", "D2", "D1", "D7"})),
    }
    bins = {"D1": 0, "D2": 0, "D5": 0, "D7": 0}
    return CircuitModel(layout, sources, tuple(steps), detectors, patterns, bins)


def build_swap_circuit(
    source: SourceParams, interference: InterferenceParams
) -> CircuitModel:
    """Time-bin swapping register: early/late pairs, joint measurement, analysis.

    Each source pumps one squeezed pair per bin.  The signals of both
    bins meet at the central station; the joint measurement heralds on
    clicks at opposite outputs in opposite bins.  One ordering is a
    click at output 1 in the early bin (D4) with a click at output 2 in
    the late bin (D6); the mirrored ordering is output 2 early (D2)
    with output 1 late (D8).  Each party's idler pair is closed in an
    analysis interferometer whose outputs are D1/D3 (party A) and D7/D5
    (party B).  Patterns P1467, P1465, P3467, P3465 are the
    herald-plus-outputs coincidences for the first ordering; P1287,
    P1285, P3287, P3285 are their mirrors (same positional convention:
    A's interferometer output, the two herald clicks, B's output).
    """
    labels = []
    for tb in ("early", "late"):
        labels += [
            ModeLabel("alice", "signal", tb),
            ModeLabel("alice", "idler", tb),
            ModeLabel("bob", "signal", tb),
            ModeLabel("bob", "idler", tb),
        ]
    for tb in ("early", "late"):
        labels += [
            ModeLabel("alice", "mismatched", tb),
            ModeLabel("alice", "aux", tb),
            ModeLabel("bob", "mismatched", tb),
            ModeLabel("bob", "aux", tb),
        ]
    layout = ModeLayout(labels)
    n = len(layout)
    ASE, AIE, BSE, BIE, ASL, AIL, BSL, BIL = 0, 1, 2, 3, 4, 5, 6, 7
    MMAE, AUXAE, MMBE, AUXBE, MMAL, AUXAL, MMBL, AUXBL = 8, 9, 10, 11, 12, 13, 14, 15

    sources = (
        TmsvSource(ASE, AIE, source.mu_a),
        TmsvSource(ASL, AIL, source.mu_a),
        TmsvSource(BSE, BIE, source.mu_b),
        TmsvSource(BSL, BIL, source.mu_b),
    )
    steps: list[Step] = [
        LossStep(ASE, source.eta_as),
        LossStep(ASL, source.eta_as),
        LossStep(AIE, source.eta_ai),
        LossStep(AIL, source.eta_ai),
        LossStep(BSE, source.eta_bs),
        LossStep(BSL, source.eta_bs),
        LossStep(BIE, source.eta_bi),
        LossStep(BIL, source.eta_bi),
        _overlap_split(n, interference.zeta, ASE, MMAE),
        _overlap_split(n, interference.zeta, BSE, MMBE),
        _overlap_split(n, interference.zeta, ASL, MMAL),
        _overlap_split(n, interference.zeta, BSL, MMBL),
        *_central_station(n, interference.tau_c, ASE, BSE, MMAE, AUXAE, MMBE, AUXBE),
        *_central_station(n, interference.tau_c, ASL, BSL, MMAL, AUXAL, MMBL, AUXBL),
        *_analysis_interferometer(n, AIE, AIL, interference.theta_a, interference.tau_a),
        *_analysis_interferometer(n, BIE, BIL, interference.theta_b, interference.tau_b),
    ]
    # Port labels are pinned by the Bell-state herald: D4 (early bin, output
    # 1) with D6 (late bin, output 2) projects the idlers so that the D1-D7
    # coincidence fringe peaks at theta_a = theta_b.  That makes D1 the
    # late-slot output of party A's interferometer and D7 the early-slot
    # output of party B's.
    detectors = {
        "D1": DetectorSpec("D1", frozenset({AIL})),
        "D3": DetectorSpec("D3", frozenset({AIE})),
        "D4": DetectorSpec("D4", frozenset({ASE, MMAE, AUXBE})),
        "D2": DetectorSpec("D2", frozenset({BSE, AUXAE, MMBE})),
        "D8": DetectorSpec("D8", frozenset({ASL, MMAL, AUXBL})),
        "D6": DetectorSpec("D6", frozenset({BSL, AUXAL, MMBL})),
        "D7": DetectorSpec("D7", frozenset({BIE})),
        "D5": DetectorSpec("D5", frozenset({BIL})),
    }
    patterns = {
        "P1467": ClickPattern(frozenset({"D1", "D4", "D6", "D7"})),
        "P1465": ClickPattern(frozenset({"D1", "D4", "D6", "D5"})),
        "P3467": ClickPattern(frozenset({"D3", "D4", "D6", "D7"})),
        "P3465": ClickPattern(frozenset({"D3", "D4", "D6", "D5"})),
        "P1287": ClickPattern(frozenset({"D1", "D2", "D8", "D7"})),
        "P1285": ClickPattern(frozenset({"D1", "D2", "D8", "D5"})),
        "P3287": ClickPattern(frozenset({"D3", "D2", "D8", "D7"})),
        "P3285": ClickPattern(frozenset({"D3", "D2", "D8", "D5"})),
    }
    bins = {
        "D1": BIN_SEPARATION_PS,
        "D3": BIN_SEPARATION_PS,
        "D4": 0,
        "D2": 0,
        "D8": BIN_SEPARATION_PS,
        "D6": BIN_SEPARATION_PS,
        "D7": BIN_SEPARATION_PS,
        "D5": BIN_SEPARATION_PS,
    }
    return CircuitModel(layout, sources, tuple(steps), detectors, patterns, bins)


def build_pair_visibility_circuit(
    mu: float,
    eta_signal: float = 1.0,
    eta_idler: float = 1.0,
    tau_a: float = BALANCED,
    tau_b: float = BALANCED,
    theta: float = 0.0,
    theta_b: float = 0.0,
) -> CircuitModel:
    """One time-bin source analyzed by two interferometers.

    Signal goes to interferometer A (outputs D1/D2, scanned phase
    ``theta``), idler to interferometer B (outputs D3/D4, phase
    ``theta_b``, normally held at zero); the four coincidence patterns
    P13, P14, P23, P24 trace out complementary fringes in the scanned
    phase.
    """
    labels = [
        ModeLabel("source", "signal", "early"),
        ModeLabel("source", "idler", "early"),
        ModeLabel("source", "signal", "late"),
        ModeLabel("source", "idler", "late"),
    ]
    layout = ModeLayout(labels)
    n = len(layout)
    SE, IE, SL, IL = range(4)
    sources = (TmsvSource(SE, IE, mu), TmsvSource(SL, IL, mu))
    steps: list[Step] = [
        LossStep(SE, eta_signal),
        LossStep(SL, eta_signal),
        LossStep(IE, eta_idler),
        LossStep(IL, eta_idler),
        *_analysis_interferometer(n, SE, SL, theta, tau_a),
        *_analysis_interferometer(n, IE, IL, theta_b, tau_b),
    ]
    detectors = {
        "D1": DetectorSpec("D1", frozenset({SE})),
        "D2": DetectorSpec("D2", frozenset({SL})),
        "D3": DetectorSpec("D3", frozenset({IE})),
        "D4": DetectorSpec("D4", frozenset({IL})),
    }
    patterns = {
        "P13": ClickPattern(frozenset({"D1", "D3"})),
        "P14": ClickPattern(frozenset({"D1", "D4"})),
        "P23": ClickPattern(frozenset({"D2", "D3"})),
        "P24": ClickPattern(frozenset({"D2", "D4"})),
    }
    bins = {name: BIN_SEPARATION_PS for name in detectors}
    return CircuitModel(layout, sources, tuple(steps), detectors, patterns, bins)

"""Threshold (click / no-click) detection on Gaussian states.

A detector is a named set of modes read out by one non-photon-number-
resolving device.  The no-event POVM element is the vacuum projector on
the union of the monitored modes, scaled by ``(1 - nu)`` per detector to
model dark counts; the event element is its complement.  Probabilities
of joint click patterns follow by inclusion-exclusion over the
must-click set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CapacityError, NumericalDomainError
from .gaussian import GaussianState, vacuum_probability

__all__ = [
    "DetectorSpec",
    "ClickPattern",
    "validate_registry",
    "no_click_probability",
    "click_pattern_probability",
    "pattern_distribution",
]

# Probabilities this far below zero are rounding noise and are clamped;
# anything worse indicates a real bug upstream.
NEGATIVITY_TOL = 1e-10

# Exhaustive pattern enumeration is exponential in the detector count.
MAX_DETECTORS = 10


@dataclass(frozen=True)
class DetectorSpec:
    """One threshold detector: a name, its modes, and a dark-count probability.

    ``dark_count_prob`` is the per-gate probability of a spurious click,
    folded into the POVM as ``|0><0| -> (1 - nu) |0><0|``.
    """

    name: str
    modes: frozenset[int]
    dark_count_prob: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "modes", frozenset(int(m) for m in self.modes))
        if not self.modes:
            raise ValueError(f"detector {self.name!r} monitors no modes")
        if not 0.0 <= self.dark_count_prob < 1.0:
            raise ValueError(f"dark count probability out of range: {self.dark_count_prob}")


@dataclass(frozen=True)
class ClickPattern:
    """A coincidence requirement: these detectors fired, those stayed silent.

    Detectors in neither set are unconditioned (marginalized over).
    """

    must_click: frozenset[str]
    must_not_click: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "must_click", frozenset(self.must_click))
        object.__setattr__(self, "must_not_click", frozenset(self.must_not_click))
        if self.must_click & self.must_not_click:
            raise ValueError("a detector cannot be required to both click and stay silent")


def validate_registry(detectors: Mapping[str, DetectorSpec]) -> None:
    """Check names are consistent and no mode is monitored twice."""
    seen: dict[int, str] = {}
    for name, det in detectors.items():
        if name != det.name:
            raise ValueError(f"registry key {name!r} does not match detector name {det.name!r}")
        for m in det.modes:
            if m in seen:
                raise ValueError(f"mode {m} monitored by both {seen[m]!r} and {name!r}")
            seen[m] = name


def no_click_probability(
    state: GaussianState,
    detectors: Iterable[DetectorSpec],
) -> float:
    """Probability that none of the given detectors fire.

    Equal to the vacuum probability of the union of their modes times
    the product of ``(1 - nu)`` over the detectors.
    """
    modes: set[int] = set()
    scale = 1.0
    for det in detectors:
        modes |= det.modes
        scale *= 1.0 - det.dark_count_prob
    return scale * vacuum_probability(state, sorted(modes))


def click_pattern_probability(
    state: GaussianState,
    pattern: ClickPattern,
    detectors: Mapping[str, DetectorSpec],
) -> float:
    """Probability of a click pattern, by inclusion-exclusion.

    P = sum over subsets T of must_click of (-1)^|T| * P_no-click(T u must_not_click).
    """
    unknown = (pattern.must_click | pattern.must_not_click) - set(detectors)
    if unknown:
        raise ValueError(f"pattern references unknown detectors: {sorted(unknown)}")
    silent = [detectors[n] for n in pattern.must_not_click]
    clickers = [detectors[n] for n in sorted(pattern.must_click)]
    p = 0.0
    for size in range(len(clickers) + 1):
        for subset in itertools.combinations(clickers, size):
            p += (-1.0) ** size * no_click_probability(state, list(subset) + silent)
    return _clamp_probability(p)


def pattern_distribution(
    state: GaussianState,
    detectors: Mapping[str, DetectorSpec],
) -> dict[frozenset[str], float]:
    """Probability of every exact click assignment over the registry.

    Keys are the sets of detectors that fired.  Built from the 2^k
    no-click subset probabilities by a Moebius inversion, so the result
    sums to the all-subsets inclusion-exclusion identity (one) up to
    rounding.
    """
    names = sorted(detectors)
    if len(names) > MAX_DETECTORS:
        raise CapacityError(
            f"pattern_distribution supports at most {MAX_DETECTORS} detectors, got {len(names)}"
        )
    silent_prob: dict[frozenset[str], float] = {}
    for size in range(len(names) + 1):
        for subset in itertools.combinations(names, size):
            silent_prob[frozenset(subset)] = no_click_probability(
                state, [detectors[n] for n in subset]
            )
    dist: dict[frozenset[str], float] = {}
    all_names = set(names)
    for size in range(len(names) + 1):
        for clicked in itertools.combinations(names, size):
            silent = all_names - set(clicked)
            p = 0.0
            # sum over supersets of the silent set
            extra = sorted(set(clicked))
            for k in range(len(extra) + 1):
                for more in itertools.combinations(extra, k):
                    p += (-1.0) ** k * silent_prob[frozenset(silent) | frozenset(more)]
            dist[frozenset(clicked)] = _clamp_probability(p)
    return dist


def _clamp_probability(p: float) -> float:
    if p < -NEGATIVITY_TOL:
        raise NumericalDomainError(f"pattern probability {p:.3e} is negative beyond tolerance")
    return min(1.0, max(0.0, p))

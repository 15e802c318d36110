"""Figures of merit and statistics for interference and swapping runs.

Visibilities four ways (pipeline evaluation, closed forms, lowest-order
expansions, curve fits), the affine maps tying them to fidelity, CHSH,
and key rates, and the calibration helpers (Klyshko rates in, overlap
inference out).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .errors import ConfigError, FitError, NumericalDomainError
from .experiments import (
    BALANCED,
    InterferenceParams,
    SourceParams,
    build_hom_circuit,
    build_pair_visibility_circuit,
    build_swap_circuit,
)

VISIBILITY_KINDS = frozenset({"HOM2", "HOM3A", "HOM3B", "HOM4", "ENT", "SWAP"})
VISIBILITY_METHODS = frozenset({"pipeline", "closed_form", "taylor", "fit"})

#: Coincidence pattern measured for each interference order.
HOM_ORDER_PATTERNS = {"2": "P21", "3A": "P521", "3B": "P217", "4": "P5217"}

_SQRT8 = 2.0 * math.sqrt(2.0)

__all__ = [
    "VISIBILITY_KINDS",
    "VISIBILITY_METHODS",
    "HOM_ORDER_PATTERNS",
    "VisibilityResult",
    "QkdBudget",
    "FitResult",
    "ChshResult",
    "hom_visibility",
    "swap_visibility",
    "ent_visibility",
    "closed_form_visibility",
    "taylor_visibility",
    "fidelity_from_visibility",
    "chsh_parameter",
    "binary_entropy",
    "secret_key_fraction",
    "key_rate_from_visibility",
    "phase_error_from_visibility",
    "fit_sinusoid",
    "fit_hom_dip",
    "klyshko_estimate",
    "infer_zeta",
]


@dataclasses.dataclass(frozen=True)
class VisibilityResult:
    """A visibility with its provenance: what was measured and how."""

    value: float
    uncertainty: float
    kind: str
    method: str

    def __post_init__(self):
        if not -1.0 <= self.value <= 1.0:
            raise NumericalDomainError(f"visibility {self.value} outside [-1, 1]")
        if self.uncertainty < 0.0:
            raise ConfigError("uncertainty must be nonnegative")
        if self.kind not in VISIBILITY_KINDS:
            raise ConfigError(f"unknown visibility kind {self.kind!r}")
        if self.method not in VISIBILITY_METHODS:
            raise ConfigError(f"unknown visibility method {self.method!r}")


@dataclasses.dataclass(frozen=True)
class QkdBudget:
    """Secret-key bookkeeping: error rates in, key fraction out.

    ``key_fraction`` is clamped at zero (a negative bound certifies
    nothing); ``key_fraction_raw`` keeps the signed value.  The
    asymmetric uncertainties come from pushing the error rates one
    standard deviation each way.
    """

    kappa: float
    e_t: float
    e_p: float
    key_fraction: float
    key_fraction_raw: float
    uncertainty_plus: float = 0.0
    uncertainty_minus: float = 0.0

    def __post_init__(self):
        if self.key_fraction > 1.0:
            raise NumericalDomainError("key fraction cannot exceed 1")


@dataclasses.dataclass(frozen=True)
class FitResult:
    """Weighted-least-squares output for one of the fringe/dip models."""

    parameters: dict[str, float]
    uncertainties: dict[str, float]
    covariance: np.ndarray
    chi_square: float
    model: str

    @property
    def visibility(self) -> float:
        return self.parameters["visibility"]

    @property
    def visibility_uncertainty(self) -> float:
        return self.uncertainties["visibility"]

    def to_visibility_result(self, kind: str) -> VisibilityResult:
        return VisibilityResult(self.visibility, self.visibility_uncertainty, kind, "fit")


@dataclasses.dataclass(frozen=True)
class ChshResult:
    """CHSH S parameter derived from a fringe visibility."""

    s: float
    violation: bool
    sigma_distance: float | None = None


# ---------------------------------------------------------------------------
# Pipeline visibilities


def _normalize_order(order) -> str:
    key = str(order).upper()
    if key not in HOM_ORDER_PATTERNS:
        raise ConfigError(f"interference order must be one of 2, 3A, 3B, 4; got {order!r}")
    return key


def hom_visibility(
    order, src: SourceParams, intf: InterferenceParams
) -> VisibilityResult:
    """Interference visibility V = [P(zeta=0) - P(zeta)] / P(zeta=0).

    ``order`` picks the coincidence pattern: 2 for the bare twofold at
    the central beamsplitter, 3A/3B adding one party's idler herald,
    4 for the full fourfold.  The distinguishable reference keeps every
    other parameter of ``intf`` fixed.
    """
    key = _normalize_order(order)
    pattern = HOM_ORDER_PATTERNS[key]
    reference = dataclasses.replace(intf, zeta=0.0)
    p_ref = build_hom_circuit(src, reference).pattern_probability(pattern)
    p_int = build_hom_circuit(src, intf).pattern_probability(pattern)
    if p_ref <= 0.0:
        raise NumericalDomainError(
            f"reference probability for {pattern} vanished; no dip to measure"
        )
    value = (p_ref - p_int) / p_ref
    return VisibilityResult(value, 0.0, f"HOM{key}", "pipeline")


def swap_visibility(src: SourceParams, intf: InterferenceParams) -> VisibilityResult:
    """Swapping fringe contrast from the heralded fourfold at two phases.

    Evaluates the coincidence with party A's interferometer at 0 and at
    pi while party B sits at ``intf.theta_b``; the remaining interference
    parameters pass through unchanged.
    """
    at_zero = dataclasses.replace(intf, theta_a=0.0)
    at_pi = dataclasses.replace(intf, theta_a=math.pi)
    p0 = build_swap_circuit(src, at_zero).pattern_probability("P1467")
    p1 = build_swap_circuit(src, at_pi).pattern_probability("P1467")
    if p0 + p1 <= 0.0:
        raise NumericalDomainError(
            "both fringe extrema have zero probability; the fringe is degenerate"
        )
    value = (p0 - p1) / (p0 + p1)
    return VisibilityResult(value, 0.0, "SWAP", "pipeline")


def ent_visibility(
    mu: float,
    eta_signal: float = 1.0,
    eta_idler: float = 1.0,
    tau_a: float = BALANCED,
    tau_b: float = BALANCED,
) -> VisibilityResult:
    """Two-photon fringe contrast of a single source read by two MIs.

    The P13 port pairing sits at its minimum when the two analysis
    phases sum to zero and at its maximum when they sum to pi, so both
    extrema come from direct evaluation rather than a numeric search.
    """
    p_min = build_pair_visibility_circuit(
        mu, eta_signal, eta_idler, tau_a, tau_b, theta=0.0
    ).pattern_probability("P13")
    p_max = build_pair_visibility_circuit(
        mu, eta_signal, eta_idler, tau_a, tau_b, theta=math.pi
    ).pattern_probability("P13")
    if p_min + p_max <= 0.0:
        raise NumericalDomainError(
            "both fringe extrema have zero probability; the fringe is degenerate"
        )
    value = (p_max - p_min) / (p_max + p_min)
    return VisibilityResult(value, 0.0, "ENT", "pipeline")


# ---------------------------------------------------------------------------
# Closed forms (equal mean photon numbers, equal path efficiencies)


def _require_unit_interval(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name} must lie in [0, 1], got {value}")


def closed_form_visibility(
    kind: str, mu: float, eta: float = 1.0, zeta: float = 1.0
) -> float:
    """Analytic visibility for symmetric sources.

    Valid for equal mean pair numbers and equal path efficiencies on
    all four arms; the SWAP form additionally holds only at unit
    efficiency and full overlap and rejects anything else.
    """
    if mu < 0.0:
        raise ConfigError(f"mean pair number must be nonnegative, got {mu}")
    _require_unit_interval("eta", eta)
    _require_unit_interval("zeta", zeta)
    x = eta * mu
    z2 = zeta * zeta
    if kind == "HOM2":
        return 8 * z2 * (1 + x) ** 2 / ((6 + 6 * x + x**2) * (4 + 4 * x + (1 - z2) * x**2))
    if kind == "HOM3":
        first = (1 + x + x**2) / (1 + x) ** 2
        shared = 1 / ((1 + x) * (-1 - 2 * x + eta**2 * mu))
        n = (
            first
            + shared
            + 8 / (-4 - 4 * x + (-1 + z2) * x**2)
            + 8 / (2 * (1 + x) * (2 + x) + (-1 + eta) * x * (-2 + (-1 + z2) * x))
        )
        d = (
            first
            + shared
            - 8 / (2 + x) ** 2
            + 8 / ((2 + x) * (2 + 3 * x - eta**2 * mu))
        )
        return 1 - n / d
    if kind == "HOM4":
        num = (
            1
            + 2 / (1 + x) ** 2
            - 2 / (1 + x)
            + (-1 + eta * (-3 + 2 * eta) * mu) / ((1 + x) * (-1 + (-2 + eta) * x) ** 2)
            + 8 / (-4 + x * (-4 + (-1 + z2) * x))
            + 16 / (4 + x * (8 - 2 * eta + (3 + z2 * (-1 + eta) - eta) * x))
            + 8
            / (
                (2 + x * (3 - zeta) + eta**2 * mu * (zeta - 1))
                * (-2 - x * (3 + zeta) + eta**2 * mu * (zeta + 1))
            )
        )
        den = (
            (1 + eta**2 * mu**2) / (1 + x) ** 2
            - 8 / (2 + x) ** 2
            - 8 / (-2 + (-3 + eta) * x) ** 2
            - 16 / ((2 + x) * (-2 + (-3 + eta) * x))
            + 1 / (-1 + (-2 + eta) * x) ** 2
            + 2 / ((1 + x) * (-1 + (-2 + eta) * x))
        )
        return 1 - num / den
    if kind == "SWAP":
        if eta != 1.0 or zeta != 1.0:
            raise ConfigError(
                "the swap closed form is only valid at unit efficiency and"
                f" full overlap; got eta={eta}, zeta={zeta}"
            )
        n = mu**2 / ((1 + mu) ** 3 * (2 + mu) ** 2)
        d = (
            2
            + 4 / (1 + mu) ** 2
            - 8 / (1 + mu)
            - 16 / (2 + 5 * mu + 4 * mu**2 + mu**3)
            + 4 / (4 + 12 * mu + 13 * mu**2 + 6 * mu**3 + mu**4)
            + 32 / math.sqrt(16 + 56 * mu + 73 * mu**2 + 42 * mu**3 + 9 * mu**4)
            + 16 / (16 + 48 * mu + 48 * mu**2 + 16 * mu**3)
        )
        return n / d
    raise ConfigError(f"unknown closed-form kind {kind!r}")


def taylor_visibility(
    kind: str, mu_a: float, mu_b: float, etas: Sequence[float], zeta: float
) -> float:
    """Lowest-order visibility in the small-pair-number regime.

    ``etas`` lists the path efficiencies as (eta_ai, eta_as, eta_bs,
    eta_bi), the same order the source parameters use.  Accurate to a
    few percent once both mean pair numbers are below about 1e-3; no
    hard bound is enforced.
    """
    if len(etas) != 4:
        raise ConfigError("etas must hold the four path efficiencies")
    eta_ai, eta_as, eta_bs, eta_bi = (float(e) for e in etas)
    for name, val in (("eta_ai", eta_ai), ("eta_as", eta_as),
                      ("eta_bs", eta_bs), ("eta_bi", eta_bi)):
        _require_unit_interval(name, val)
    _require_unit_interval("zeta", zeta)
    if mu_a <= 0.0 or mu_b <= 0.0:
        raise ConfigError("mean pair numbers must be positive")
    z2 = zeta * zeta
    signal_ratio = (eta_bs * mu_b) / (eta_as * mu_a)
    if kind == "HOM2":
        return z2 * signal_ratio / (1 + signal_ratio + signal_ratio**2)
    if kind == "HOM3A":
        # The double-pair background enters through the heralding arm's
        # threshold factor (2 - eta_iA); the competition itself is
        # between the two signal fluxes.
        return z2 * signal_ratio / ((2 - eta_ai) + signal_ratio)
    if kind == "HOM3B":
        return z2 / (1 + (2 - eta_bi) * signal_ratio)
    if kind == "HOM4":
        return z2
    raise ConfigError(f"unknown expansion kind {kind!r}")


# ---------------------------------------------------------------------------
# Derived figures of merit


def fidelity_from_visibility(v: float) -> float:
    """Bell-diagonal fidelity F = (3V + 1)/4."""
    if not -1.0 / 3.0 <= v <= 1.0:
        raise NumericalDomainError(f"visibility {v} outside [-1/3, 1]")
    return (3.0 * v + 1.0) / 4.0


def chsh_parameter(v: float, sigma: float | None = None) -> ChshResult:
    """CHSH value S = 2*sqrt(2)*V and whether it beats the local bound.

    With an uncertainty supplied, also reports how many standard
    deviations the violation clears S = 2 by.
    """
    if not 0.0 <= v <= 1.0:
        raise NumericalDomainError(f"visibility {v} outside [0, 1]")
    s = _SQRT8 * v
    distance = None
    if sigma is not None:
        if sigma <= 0.0:
            raise ConfigError("uncertainty must be positive")
        distance = (s - 2.0) / (_SQRT8 * sigma)
    return ChshResult(s, v > 1.0 / math.sqrt(2.0), distance)


def binary_entropy(x: float) -> float:
    """H2(x) with the limit values at both endpoints."""
    if not 0.0 <= x <= 1.0:
        raise NumericalDomainError(f"binary entropy argument {x} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def secret_key_fraction(
    kappa: float,
    e_t: float,
    e_p: float,
    sigma_e_t: float = 0.0,
    sigma_e_p: float = 0.0,
) -> QkdBudget:
    """Key fraction lower bound R/R_s >= 1 - kappa*H2(e_t) - H2(e_p).

    The asymmetric uncertainties push both error rates one standard
    deviation down (plus) and up (minus), clipping at the ends of
    [0, 1/2].
    """
    if kappa < 1.0:
        raise ConfigError(f"error-correction efficiency must be >= 1, got {kappa}")
    for name, e in (("e_t", e_t), ("e_p", e_p)):
        if not 0.0 <= e <= 0.5:
            raise ConfigError(f"{name} must lie in [0, 1/2], got {e}")
    if sigma_e_t < 0.0 or sigma_e_p < 0.0:
        raise ConfigError("uncertainties must be nonnegative")

    def bound(et: float, ep: float) -> float:
        return 1.0 - kappa * binary_entropy(et) - binary_entropy(ep)

    raw = bound(e_t, e_p)
    best = bound(max(0.0, e_t - sigma_e_t), max(0.0, e_p - sigma_e_p))
    worst = bound(min(0.5, e_t + sigma_e_t), min(0.5, e_p + sigma_e_p))
    return QkdBudget(
        kappa=kappa,
        e_t=e_t,
        e_p=e_p,
        key_fraction=max(0.0, raw),
        key_fraction_raw=raw,
        uncertainty_plus=best - raw,
        uncertainty_minus=raw - worst,
    )


def phase_error_from_visibility(v: float) -> float:
    """Phase-basis error rate e_p = (1 - V)/2."""
    if not 0.0 <= v <= 1.0:
        raise NumericalDomainError(f"visibility {v} outside [0, 1]")
    return (1.0 - v) / 2.0


def key_rate_from_visibility(
    v: float, kappa: float = 1.0, e_t: float = 0.0, sigma_v: float = 0.0
) -> QkdBudget:
    """Key fraction with the phase error taken from a swapping visibility.

    Defaults describe the visibility-only bound (perfect error
    correction, no time-basis errors); pass the measured ``kappa`` and
    ``e_t`` to reproduce an experimental budget.
    """
    e_p = phase_error_from_visibility(v)
    return secret_key_fraction(kappa, e_t, e_p, 0.0, sigma_v / 2.0)


# ---------------------------------------------------------------------------
# Curve fits


def _as_points(points, minimum: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ConfigError("points must be (x, counts, sigma) triples")
    if arr.shape[0] < minimum:
        raise ConfigError(f"need at least {minimum} points, got {arr.shape[0]}")
    x, y, s = arr.T
    if np.any(y < 0.0):
        raise ConfigError("counts must be nonnegative")
    if np.any(s <= 0.0):
        raise ConfigError("count uncertainties must be positive")
    return x, y, s


def _run_fit(model, x, y, sigma, seeds, names, model_name) -> FitResult:
    best = None
    failures = []
    for p0 in seeds:
        try:
            popt, pcov = curve_fit(
                model, x, y, p0=p0, sigma=sigma, absolute_sigma=True, maxfev=8000
            )
        except (RuntimeError, ValueError) as exc:
            failures.append(f"{np.round(p0, 4)}: {exc}")
            continue
        if not np.all(np.isfinite(pcov)):
            failures.append(f"{np.round(p0, 4)}: singular covariance")
            continue
        chi2 = float(np.sum(((y - model(x, *popt)) / sigma) ** 2))
        if best is None or chi2 < best[2]:
            best = (popt, pcov, chi2)
    if best is None:
        raise FitError(
            f"{model_name} fit did not converge from any seed; attempts: "
            + "; ".join(failures)
        )
    popt, pcov, chi2 = best
    params = dict(zip(names, (float(p) for p in popt)))
    uncert = dict(zip(names, (float(u) for u in np.sqrt(np.diag(pcov)))))
    return FitResult(params, uncert, pcov, chi2, model_name)


def _sinusoid(v, amplitude, visibility, omega, phi0):
    return amplitude * (1.0 + visibility * np.cos(2.0 * omega * v + phi0))


def fit_sinusoid(points) -> FitResult:
    """Fit C[1 + V cos(2 omega v + phi0)] to (v, counts, sigma) triples.

    Weighted least squares; the frequency seed comes from the dominant
    discrete-spectrum component of the mean-subtracted counts, the
    phase from an eight-point scan, amplitude and visibility from the
    data extrema.
    """
    x, y, sigma = _as_points(points, 5)
    amp0 = float(np.mean(y))
    if amp0 <= 0.0:
        raise ConfigError("counts are identically zero; nothing to fit")
    top, bottom = float(np.max(y)), float(np.min(y))
    vis0 = min(0.95, max(0.1, (top - bottom) / (top + bottom)))

    order = np.argsort(x)
    spacing = float(np.mean(np.diff(x[order])))
    spectrum = np.abs(np.fft.rfft(y[order] - np.mean(y)))
    freqs = np.fft.rfftfreq(len(y), d=spacing)
    k = 1 + int(np.argmax(spectrum[1:]))
    omega0 = math.pi * max(freqs[k], 1e-12)

    seeds = []
    scans = []
    for phi in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False):
        guess = (amp0, vis0, omega0, phi)
        chi2 = float(np.sum(((y - _sinusoid(x, *guess)) / sigma) ** 2))
        scans.append((chi2, guess))
    scans.sort(key=lambda pair: pair[0])
    seeds = [g for _, g in scans[:4]]

    result = _run_fit(
        _sinusoid, x, y, sigma, seeds,
        ("amplitude", "visibility", "omega", "phi0"), "sinusoid",
    )
    params = dict(result.parameters)
    cov = np.array(result.covariance)
    if params["visibility"] < 0.0:
        # Same curve with V flipped and the phase advanced by pi; keep
        # the reported visibility nonnegative.
        params["visibility"] = -params["visibility"]
        params["phi0"] += math.pi
        cov[1, :] *= -1.0
        cov[:, 1] *= -1.0
    params["phi0"] = params["phi0"] % (2.0 * math.pi)
    return FitResult(params, result.uncertainties, cov, result.chi_square, "sinusoid")


def _dip(t, amplitude, visibility, sigma_t, center):
    return amplitude * (1.0 - visibility * np.exp(-((t - center) ** 2) / (2.0 * sigma_t**2)))


def fit_hom_dip(points) -> FitResult:
    """Fit the bunching dip C[1 - V exp(-(t - t0)^2 / 2 sigma^2)].

    The reported visibility is the fractional dip depth.  Points are
    (delay ps, counts, sigma) triples and should span the dip.
    """
    x, y, sigma = _as_points(points, 5)
    amp0 = float(np.median(np.sort(y)[-max(3, len(y) // 4):]))
    if amp0 <= 0.0:
        raise ConfigError("counts are identically zero; nothing to fit")
    low = float(np.min(y))
    vis0 = min(0.95, max(0.05, 1.0 - low / amp0))
    center0 = float(x[int(np.argmin(y))])
    span = float(np.max(x) - np.min(x))
    if span <= 0.0:
        raise ConfigError("delay values are all identical")
    seeds = [
        (amp0, vis0, width, center0)
        for width in (span / 8.0, span / 4.0, span / 16.0, span / 2.0)
    ]
    result = _run_fit(
        _dip, x, y, sigma, seeds,
        ("amplitude", "visibility", "sigma", "center"), "hom_dip",
    )
    params = dict(result.parameters)
    params["sigma"] = abs(params["sigma"])
    return FitResult(
        params, result.uncertainties, result.covariance, result.chi_square, "hom_dip"
    )


# ---------------------------------------------------------------------------
# Calibration


def klyshko_estimate(
    singles_s: float, singles_i: float, coincidences: float, clock: float
) -> tuple[float, float, float]:
    """Source brightness and arm efficiencies from raw count rates.

    The coincidence-to-singles ratios give the opposite arm's
    efficiency; the singles product over coincidences-times-clock gives
    the mean pair number.  Returns (mu, eta_s, eta_i).
    """
    if singles_s <= 0.0 or singles_i <= 0.0 or clock <= 0.0:
        raise ConfigError("rates and clock must be positive")
    if coincidences == 0.0:
        raise NumericalDomainError(
            "zero coincidences; the pair rate cannot be estimated"
        )
    if coincidences < 0.0 or coincidences > min(singles_s, singles_i):
        raise ConfigError("coincidence rate must lie between 0 and the singles rates")
    eta_s = coincidences / singles_i
    eta_i = coincidences / singles_s
    mu = singles_s * singles_i / (coincidences * clock)
    return mu, eta_s, eta_i


_ZETA_KINDS = frozenset({"HOM2", "HOM3A", "HOM3B", "HOM4", "SWAP"})


def infer_zeta(
    measured_v: float, sigma_v: float, kind: str, src: SourceParams
) -> tuple[float, float]:
    """Invert the pipeline visibility for the overlap, with uncertainty.

    Bisects the squared overlap to 1e-10 (the visibility is monotone in
    it) and propagates the measurement uncertainty through the local
    slope.  Returns (zeta_sq, sigma_zeta_sq).
    """
    if kind not in _ZETA_KINDS:
        raise ConfigError(f"cannot infer overlap from visibility kind {kind!r}")
    if sigma_v < 0.0:
        raise ConfigError("uncertainty must be nonnegative")
    if measured_v < 0.0:
        raise NumericalDomainError(f"measured visibility {measured_v} is negative")

    if kind == "SWAP":
        def vis(z2: float) -> float:
            return swap_visibility(src, InterferenceParams(zeta=math.sqrt(z2))).value
    else:
        order = kind[3:]
        pattern = HOM_ORDER_PATTERNS[order]
        p_ref = build_hom_circuit(
            src, InterferenceParams(zeta=0.0)
        ).pattern_probability(pattern)
        if p_ref <= 0.0:
            raise NumericalDomainError("reference probability vanished")

        def vis(z2: float) -> float:
            p = build_hom_circuit(
                src, InterferenceParams(zeta=math.sqrt(z2))
            ).pattern_probability(pattern)
            return (p_ref - p) / p_ref

    v_max = vis(1.0)
    if measured_v > v_max + 1e-9:
        raise NumericalDomainError(
            f"measured visibility {measured_v} exceeds the attainable maximum"
            f" {v_max:.6f} at these parameters"
        )

    lo, hi = 0.0, 1.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if vis(mid) < measured_v:
            lo = mid
        else:
            hi = mid
    z2 = 0.5 * (lo + hi)

    # Wide central difference: the curve is smooth in zeta^2, while the
    # pipeline value carries cancellation noise around 1e-5 of itself,
    # so a tight step would measure noise instead of slope.
    step = 1e-2
    a = max(0.0, z2 - step)
    b = min(1.0, z2 + step)
    slope = (vis(b) - vis(a)) / (b - a)
    if slope <= 0.0:
        raise NumericalDomainError("visibility is not increasing here; cannot propagate")
    return z2, sigma_v / slope

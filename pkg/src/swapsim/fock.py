"""Truncated Fock-space brute force used to cross-check the Gaussian pipeline.

States are dense complex tensors with one axis per mode.  Ops are the
matrix exponentials the mode map induces on photon-number space, applied
to the relevant axes.  Detection sums |amplitude|^2 with per-photon
Bernoulli survival weights.  Nothing here shares code with the Gaussian
side beyond the circuit description itself; that independence is the
point.

Scaling is deliberately sacrificed for directness: a mode's axis grows
as photons can accumulate in it, and anything past ~10 occupied modes
is out of reach.  Loss is realized by an explicit vacuum ancilla on a
beamsplitter whose second output simply never appears in any detector
union (summing over its axis at readout is the partial trace).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Mapping, Sequence

import numpy as np
from scipy.linalg import expm, logm

from .detection import ClickPattern, DetectorSpec
from .errors import CapacityError, NumericalDomainError
from .experiments import CircuitModel, LossStep
from .gaussian import SymplecticOp

#: Largest analytic truncation tail accepted before the oracle refuses to
#: vouch for its own output.
TRUNCATION_GATE = 1e-6

#: Hard ceiling on tensor size (amplitudes), roughly 600 MB of complex128.
MAX_AMPLITUDES = 38_000_000

__all__ = [
    "TRUNCATION_GATE",
    "FockState",
    "tmsv_tail_bound",
    "tmsv_fock",
    "vacuum_fock",
    "product_fock",
    "apply_linear_optics_fock",
    "photon_number_marginal",
    "oracle_click_probability",
    "oracle_state",
    "oracle_pattern_probability",
]


@dataclasses.dataclass(frozen=True)
class FockState:
    """Dense photon-number amplitudes, one tensor axis per mode.

    ``eps_trunc`` carries the summed analytic tail bound of every
    truncated source that went into the state; downstream passive optics
    never increase it.
    """

    amps: np.ndarray
    eps_trunc: float = 0.0

    @property
    def num_modes(self) -> int:
        return self.amps.ndim

    @property
    def n_max(self) -> tuple[int, ...]:
        return tuple(d - 1 for d in self.amps.shape)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))


def tmsv_tail_bound(mu: float, n_max: int) -> float:
    """Weight of the discarded pair-number sectors, sum_{n>n_max} mu^n/(1+mu)^(n+1)."""
    if mu == 0.0:
        return 0.0
    return float((mu / (1.0 + mu)) ** (n_max + 1))


def tmsv_fock(mu: float, n_max: int) -> FockState:
    """Two-mode squeezed vacuum truncated at ``n_max`` photon pairs.

    Amplitudes are (-1)^n sqrt(mu^n / (1+mu)^(n+1)) on the |n, n> states.
    Refuses truncations whose analytic tail exceeds ``TRUNCATION_GATE``.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    if mu < 0.0:
        raise ValueError(f"mean pair number must be nonnegative, got {mu}")
    eps = tmsv_tail_bound(mu, n_max)
    if eps > TRUNCATION_GATE:
        raise NumericalDomainError(
            f"truncation tail {eps:.3e} exceeds {TRUNCATION_GATE:.0e} at"
            f" mu={mu}, n_max={n_max}; increase n_max"
        )
    amps = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for n in range(n_max + 1):
        amps[n, n] = (-1.0) ** n * math.sqrt(mu**n / (1.0 + mu) ** (n + 1))
    return FockState(amps, eps)


def vacuum_fock(num_modes: int = 1) -> FockState:
    amps = np.ones((1,) * num_modes, dtype=complex)
    return FockState(amps)


def product_fock(states: Sequence[FockState]) -> FockState:
    """Tensor product in the given mode order."""
    if not states:
        raise ValueError("product of nothing")
    amps = states[0].amps
    for s in states[1:]:
        amps = np.tensordot(amps, s.amps, axes=0)
    return FockState(amps, sum(s.eps_trunc for s in states))


def _ladder(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    for n in range(1, dim):
        a[n - 1, n] = math.sqrt(n)
    return a


_unitary_cache: dict[tuple, np.ndarray] = {}


def _fock_unitary(u: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    """Photon-space unitary implementing the mode map a_i -> sum_j u_ij a_j.

    Built as exp(i sum_jk h_jk adag_j a_k) with h = -i log(u); exact
    (photon-number conserving) on the supplied dimensions.
    """
    key = (dims, np.round(u, 12).tobytes())
    cached = _unitary_cache.get(key)
    if cached is not None:
        return cached
    k = len(dims)
    # -i log u, forced Hermitian; logm is overkill for the 1- and 2-mode
    # cases but harmless, and handles any passive u.
    h = -1j * logm(u)
    h = 0.5 * (h + h.conj().T)
    ops_a = []
    for i in range(k):
        factors = [np.eye(d, dtype=complex) for d in dims]
        factors[i] = _ladder(dims[i])
        full = factors[0]
        for f in factors[1:]:
            full = np.kron(full, f)
        ops_a.append(full)
    total = int(np.prod(dims))
    gen = np.zeros((total, total), dtype=complex)
    for i in range(k):
        for j in range(k):
            if h[i, j] != 0.0:
                gen += h[i, j] * (ops_a[i].conj().T @ ops_a[j])
    uf = expm(1j * gen)
    _unitary_cache[key] = uf
    return uf


def _grow(amps: np.ndarray, axis: int, new_dim: int) -> np.ndarray:
    if new_dim <= amps.shape[axis]:
        return amps
    pad = [(0, 0)] * amps.ndim
    pad[axis] = (0, new_dim - amps.shape[axis])
    return np.pad(amps, pad)


def _apply_mode_map(
    state: FockState, u: np.ndarray, modes: Sequence[int], photon_cap: int
) -> FockState:
    """Apply the passive map ``u`` to ``modes``, growing axes as needed."""
    amps = state.amps
    modes = list(modes)
    # Photon conservation bounds every output axis by the total the
    # active axes could hold, clipped by the circuit-wide photon budget.
    budget = sum(amps.shape[m] - 1 for m in modes)
    new_dim = min(budget, photon_cap) + 1
    for m in modes:
        amps = _grow(amps, m, new_dim)
    if amps.size > MAX_AMPLITUDES:
        raise CapacityError(
            f"oracle tensor would need {amps.size} amplitudes; this state is"
            " too large for brute force"
        )
    dims = tuple(amps.shape[m] for m in modes)
    uf = _fock_unitary(u, dims)
    moved = np.moveaxis(amps, modes, range(len(modes)))
    head = moved.shape[: len(modes)]
    flat = moved.reshape(int(np.prod(head)), -1)
    flat = uf @ flat
    moved = flat.reshape(*head, *moved.shape[len(modes) :])
    amps = np.moveaxis(moved, range(len(modes)), modes)
    return FockState(amps, state.eps_trunc)


def _passive_mode_matrix(op: SymplecticOp) -> tuple[np.ndarray, list[int]]:
    """Extract the complex mode map of a passive symplectic, or fail.

    A passive op acts on each (x, p) pair as multiplication by a complex
    number, i.e. every 2x2 block has the form [[Re u, -Im u], [Im u, Re u]];
    squeezers break that structure and are rejected.
    """
    s = op.matrix
    n = s.shape[0] // 2
    u = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            b = s[2 * j : 2 * j + 2, 2 * i : 2 * i + 2]
            if abs(b[0, 0] - b[1, 1]) > 1e-10 or abs(b[0, 1] + b[1, 0]) > 1e-10:
                raise ValueError(
                    "only passive operations (beamsplitters, phases) are"
                    " supported in Fock space; this symplectic squeezes"
                )
            u[i, j] = b[0, 0] + 1j * b[1, 0]
    if not np.allclose(u @ u.conj().T, np.eye(n), atol=1e-10):
        raise ValueError(
            "only passive operations (beamsplitters, phases) are supported"
            " in Fock space; this symplectic is not an orthogonal rotation"
        )
    active = [
        i
        for i in range(n)
        if abs(u[i, i] - 1.0) > 1e-14 or np.any(np.abs(np.delete(u[i], i)) > 1e-14)
    ]
    return u, active


def apply_linear_optics_fock(
    state: FockState, op: SymplecticOp, photon_cap: int | None = None
) -> FockState:
    """Oracle counterpart of ``apply_symplectic`` for passive ops only."""
    cap = photon_cap if photon_cap is not None else sum(state.n_max)
    if op.kind == "beamsplitter":
        (t,) = op.params
        r = math.sqrt(max(0.0, 1.0 - t * t))
        if r == 0.0:
            return state
        u = np.array([[t, 1j * r], [1j * r, t]])
        return _apply_mode_map(state, u, list(op.modes), cap)
    if op.kind == "phase":
        (theta,) = op.params
        (mode,) = op.modes
        d = state.amps.shape[mode]
        phases = np.exp(1j * theta * np.arange(d))
        shape = [1] * state.amps.ndim
        shape[mode] = d
        return FockState(state.amps * phases.reshape(shape), state.eps_trunc)
    u, active = _passive_mode_matrix(op)
    if not active:
        return state
    sub = u[np.ix_(active, active)]
    return _apply_mode_map(state, sub, active, cap)


def photon_number_marginal(state: FockState, mode: int) -> np.ndarray:
    """Photon-number distribution of one mode, all others traced out."""
    w = np.abs(state.amps) ** 2
    axes = tuple(i for i in range(state.num_modes) if i != mode)
    return w.sum(axis=axes)


def _silent_probability(
    weights: np.ndarray,
    silent: Sequence[str],
    detectors: Mapping[str, DetectorSpec],
    survival: Mapping[str, float],
) -> float:
    """P(none of ``silent`` clicks): each photon escapes detection there."""
    w = weights
    for name in silent:
        miss = 1.0 - survival.get(name, 1.0)
        for m in sorted(detectors[name].modes):
            d = w.shape[m]
            factor = np.power(miss, np.arange(d)) if miss > 0.0 else (np.arange(d) == 0).astype(float)
            shape = [1] * w.ndim
            shape[m] = d
            w = w * factor.reshape(shape)
    return float(w.sum())


def oracle_click_probability(
    state: FockState,
    pattern: ClickPattern,
    detectors: Mapping[str, DetectorSpec],
    loss: Mapping[str, float] | None = None,
) -> float:
    """Pattern probability by direct summation over photon-number space.

    ``loss`` maps detector names to a detection efficiency applied as an
    independent per-photon Bernoulli; omitted detectors are lossless.
    Dark counts are outside the oracle's remit (the Gaussian side's
    affine dark-count correction is validated separately).
    """
    if state.eps_trunc > TRUNCATION_GATE:
        raise NumericalDomainError(
            f"state truncation tail {state.eps_trunc:.3e} is too large to"
            " serve as ground truth"
        )
    for name in pattern.must_click | pattern.must_not_click:
        if name not in detectors:
            raise ValueError(f"pattern references unknown detector {name!r}")
    survival = dict(loss or {})
    for name, eta in survival.items():
        if not 0.0 <= eta <= 1.0:
            raise ValueError(f"detection efficiency must lie in [0, 1], got {eta}")
    weights = np.abs(state.amps) ** 2
    base = sorted(pattern.must_not_click)
    clicks = sorted(pattern.must_click)
    prob = 0.0
    for bits in range(1 << len(clicks)):
        subset = [clicks[i] for i in range(len(clicks)) if bits >> i & 1]
        sign = -1.0 if len(subset) % 2 else 1.0
        prob += sign * _silent_probability(weights, base + subset, detectors, survival)
    return min(max(prob, 0.0), 1.0)


def oracle_state(circuit: CircuitModel, n_max: int = 3) -> FockState:
    """Replay a circuit in photon-number space.

    Sources are truncated pair states; every lossy step gets its own
    vacuum ancilla axis (appended at the end, monitored by nobody, so
    the readout sum traces it out); beamsplitters and phases replay
    through their mode maps.
    """
    num = len(circuit.layout)
    amps = np.ones((1,) * num, dtype=complex)
    eps = 0.0
    photon_cap = 0
    for src in circuit.sources:
        pair = tmsv_fock(src.mu, n_max)
        eps += pair.eps_trunc
        photon_cap += 2 * n_max
        # The register is vacuum (dim 1) on both source axes, so
        # broadcasting the pair block against it is exactly the tensor
        # product that places the amplitudes on those two axes.
        expand = np.zeros(
            [n_max + 1 if i in (src.signal, src.idler) else 1 for i in range(num)],
            dtype=complex,
        )
        idx = tuple(
            slice(None) if i in (src.signal, src.idler) else 0 for i in range(num)
        )
        expand[idx] = pair.amps
        amps = amps * expand
    state = FockState(amps, eps)
    for step in circuit.steps:
        if isinstance(step, LossStep):
            if step.eta == 1.0:
                continue
            amps = state.amps[..., np.newaxis]
            state = FockState(amps, state.eps_trunc)
            t = math.sqrt(step.eta)
            r = math.sqrt(1.0 - step.eta)
            u = np.array([[t, 1j * r], [1j * r, t]])
            state = _apply_mode_map(
                state, u, [step.mode, state.num_modes - 1], photon_cap
            )
        else:
            state = apply_linear_optics_fock(state, step, photon_cap)
    return state


def oracle_pattern_probability(
    circuit: CircuitModel, pattern: str, n_max: int = 3
) -> tuple[float, float]:
    """Probability of a named pattern plus the truncation bound to judge it by."""
    if pattern not in circuit.patterns:
        raise ValueError(f"circuit has no pattern named {pattern!r}")
    state = oracle_state(circuit, n_max)
    p = oracle_click_probability(state, circuit.patterns[pattern], circuit.detectors)
    return p, state.eps_trunc

"""Gaussian states and symplectic optics in the characteristic-function picture.

Conventions used throughout the package:

* Quadratures are interleaved, ``(x_0, p_0, x_1, p_1, ...)``; mode ``k``
  owns rows/columns ``2k`` and ``2k + 1`` of every matrix.
* A state is the pair ``(d, gamma)`` appearing in
  ``chi(xi) = exp(-xi^T gamma xi / 4 - i d^T xi)``, so the vacuum
  covariance is the identity (hbar = 1).
* A symplectic matrix ``S`` acts as ``gamma -> S^T gamma S`` and
  ``d -> S^T d``.

With these choices a two-mode squeezed vacuum of mean thermal photon
number ``mu`` per arm has covariance ``[[A, B], [B, A]]`` with
``A = (1 + 2 mu) I`` and ``B = diag(+2 sqrt(mu (mu+1)), -2 sqrt(mu (mu+1)))``,
and the probability of finding vacuum in a block of M modes is
``2^M / sqrt(det(I + gamma_block))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalDomainError

__all__ = [
    "ModeLabel",
    "ModeLayout",
    "GaussianState",
    "SymplecticOp",
    "symplectic_form",
    "vacuum_state",
    "thermal_covariance",
    "tmsv_covariance",
    "tmsv_state",
    "direct_sum",
    "beamsplitter_symplectic",
    "phase_shifter_symplectic",
    "apply_symplectic",
    "apply_loss",
    "reduce_state",
    "vacuum_probability",
    "mean_photon_numbers",
    "symplectic_eigenvalues",
]

# Tolerances fixed once here so the whole package agrees on them.
SYMMETRY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-12
PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True)
class ModeLabel:
    """Human-readable identity of one optical mode.

    ``party`` is who owns the mode (``alice``/``bob``/``charlie``/``ancilla``),
    ``channel`` distinguishes signal, idler and the bookkeeping modes used
    for partial distinguishability, ``time_bin`` is ``early``/``late``/``none``,
    and ``port`` numbers otherwise identical modes.
    """

    party: str
    channel: str
    time_bin: str = "none"
    port: int = 0

    def __str__(self) -> str:
        return f"{self.party}.{self.channel}.{self.time_bin}.{self.port}"


class ModeLayout:
    """Ordered, unique mode labels; position in the tuple = mode index."""

    def __init__(self, labels: Iterable[ModeLabel]):
        self.labels = tuple(labels)
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate mode labels in layout")
        self._index = {label: k for k, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, k: int) -> ModeLabel:
        return self.labels[k]

    def index(self, label: ModeLabel) -> int:
        return self._index[label]

    def find(self, **attrs) -> list[int]:
        """Indices of all modes matching the given label attributes."""
        out = []
        for k, label in enumerate(self.labels):
            if all(getattr(label, name) == val for name, val in attrs.items()):
                out.append(k)
        return out


def _quad_indices(modes: Sequence[int]) -> np.ndarray:
    modes = np.asarray(modes, dtype=int)
    return np.column_stack([2 * modes, 2 * modes + 1]).ravel()


def symplectic_form(num_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form, [[0, 1], [-1, 0]] for every mode."""
    omega = np.zeros((2 * num_modes, 2 * num_modes))
    for k in range(num_modes):
        omega[2 * k, 2 * k + 1] = 1.0
        omega[2 * k + 1, 2 * k] = -1.0
    return omega


@dataclass(frozen=True)
class GaussianState:
    """Zero-mean-or-displaced Gaussian state ``(d, gamma)``.

    The covariance is symmetrized on construction; an asymmetry larger
    than ``SYMMETRY_TOL`` is treated as a bug in the caller.
    """

    covariance: np.ndarray
    displacement: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        gamma = np.array(self.covariance, dtype=float)
        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
            raise ValueError(f"covariance must be 2N x 2N, got {gamma.shape}")
        asym = np.max(np.abs(gamma - gamma.T)) if gamma.size else 0.0
        if asym > SYMMETRY_TOL:
            raise NumericalDomainError(f"covariance asymmetry {asym:.3e} exceeds tolerance")
        gamma = 0.5 * (gamma + gamma.T)
        if not np.all(np.isfinite(gamma)):
            raise NumericalDomainError("covariance contains non-finite entries")
        d = self.displacement
        d = np.zeros(gamma.shape[0]) if d is None else np.array(d, dtype=float)
        if d.shape != (gamma.shape[0],):
            raise ValueError("displacement length must match covariance size")
        gamma.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "covariance", gamma)
        object.__setattr__(self, "displacement", d)

    @property
    def num_modes(self) -> int:
        return self.covariance.shape[0] // 2

    def assert_physical(self, tol: float = PHYSICALITY_TOL) -> None:
        """Raise unless all symplectic eigenvalues are >= 1 - tol."""
        nu = symplectic_eigenvalues(self.covariance)
        if nu.size and nu.min() < 1.0 - tol:
            raise NumericalDomainError(
                f"state violates the uncertainty bound: min symplectic eigenvalue {nu.min():.12f}"
            )


@dataclass(frozen=True)
class SymplecticOp:
    """A symplectic matrix plus enough structure to replay it elsewhere.

    ``kind``/``params``/``modes`` describe how the matrix was built
    (``"beamsplitter"`` with amplitude transmittance ``t`` on two modes,
    or ``"phase"`` with angle ``theta`` on one mode) so that non-Gaussian
    backends can apply the same operation without reverse-engineering the
    matrix.  Matrices are validated against ``S^T Omega S = Omega`` on
    construction.
    """

    matrix: np.ndarray
    kind: str = "custom"
    params: tuple[float, ...] = ()
    modes: tuple[int, ...] = ()

    def __post_init__(self):
        s = np.array(self.matrix, dtype=float)
        n2 = s.shape[0]
        if s.ndim != 2 or s.shape != (n2, n2) or n2 % 2:
            raise ValueError(f"symplectic matrix must be square 2N x 2N, got {s.shape}")
        omega = symplectic_form(n2 // 2)
        defect = np.max(np.abs(s.T @ omega @ s - omega))
        if defect > SYMPLECTIC_TOL:
            raise NumericalDomainError(f"matrix is not symplectic (defect {defect:.3e})")
        s.setflags(write=False)
        object.__setattr__(self, "matrix", s)

    @property
    def num_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def is_passive(self, tol: float = 1e-12) -> bool:
        """Passive (photon-number preserving) iff the matrix is orthogonal."""
        s = self.matrix
        return bool(np.max(np.abs(s.T @ s - np.eye(s.shape[0]))) <= tol)


def vacuum_state(num_modes: int) -> GaussianState:
    return GaussianState(np.eye(2 * num_modes))


def thermal_covariance(mean_photons: float) -> np.ndarray:
    if mean_photons < 0:
        raise ValueError("mean photon number must be non-negative")
    return (1.0 + 2.0 * mean_photons) * np.eye(2)


def tmsv_covariance(mu: float) -> np.ndarray:
    """4x4 covariance of a two-mode squeezed vacuum with mean pair number mu."""
    if mu < 0:
        raise ValueError("mean photon number must be non-negative")
    c = 2.0 * math.sqrt(mu * (mu + 1.0))
    a = (1.0 + 2.0 * mu) * np.eye(2)
    b = np.diag([c, -c])
    return np.block([[a, b], [b, a]])


def tmsv_state(mu: float) -> GaussianState:
    return GaussianState(tmsv_covariance(mu))


def direct_sum(states: Sequence[GaussianState]) -> GaussianState:
    """Concatenate uncorrelated states into one register, preserving order."""
    if not states:
        raise ValueError("direct_sum of nothing")
    n2 = sum(s.covariance.shape[0] for s in states)
    gamma = np.zeros((n2, n2))
    d = np.zeros(n2)
    at = 0
    for s in states:
        w = s.covariance.shape[0]
        gamma[at : at + w, at : at + w] = s.covariance
        d[at : at + w] = s.displacement
        at += w
    return GaussianState(gamma, d)


def beamsplitter_symplectic(t: float, modes: tuple[int, int], num_modes: int) -> SymplecticOp:
    """Beamsplitter of amplitude transmittance ``t`` between two modes.

    The 2x2 blocks are ``T = t I`` on the diagonal and
    ``R = [[0, -r], [r, 0]]`` (with ``r = sqrt(1 - t^2)``) on both
    off-diagonals, which preserves the symplectic form for any ``t`` in
    [0, 1].
    """
    i, j = modes
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"amplitude transmittance must lie in [0, 1], got {t}")
    r = math.sqrt(max(0.0, 1.0 - t * t))
    s = np.eye(2 * num_modes)
    tt = t * np.eye(2)
    rr = np.array([[0.0, -r], [r, 0.0]])
    ii, jj = _quad_indices([i]), _quad_indices([j])
    s[np.ix_(ii, ii)] = tt
    s[np.ix_(jj, jj)] = tt
    s[np.ix_(ii, jj)] = rr
    s[np.ix_(jj, ii)] = rr
    return SymplecticOp(s, kind="beamsplitter", params=(t,), modes=(i, j))


def phase_shifter_symplectic(theta: float, mode: int, num_modes: int) -> SymplecticOp:
    """Rotation by ``theta`` in the (x, p) plane of one mode."""
    c, sn = math.cos(theta), math.sin(theta)
    s = np.eye(2 * num_modes)
    ii = _quad_indices([mode])
    s[np.ix_(ii, ii)] = np.array([[c, -sn], [sn, c]])
    return SymplecticOp(s, kind="phase", params=(theta,), modes=(mode,))


def apply_symplectic(state: GaussianState, op: SymplecticOp) -> GaussianState:
    if op.matrix.shape[0] != state.covariance.shape[0]:
        raise ValueError("operation size does not match state size")
    s = op.matrix
    return GaussianState(s.T @ state.covariance @ s, s.T @ state.displacement)


def apply_loss(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel of transmission ``eta`` on one mode.

    Closed form of mixing with vacuum on a beamsplitter of amplitude
    transmittance sqrt(eta) and discarding the other output: the mode's
    own block becomes ``eta gamma + (1 - eta) I``, every cross block and
    the displacement pick up sqrt(eta).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must lie in [0, 1], got {eta}")
    gamma = np.array(state.covariance)
    d = np.array(state.displacement)
    ii = _quad_indices([mode])
    root = math.sqrt(eta)
    gamma[ii, :] *= root
    gamma[:, ii] *= root
    gamma[np.ix_(ii, ii)] += (1.0 - eta) * np.eye(2)
    d[ii] *= root
    return GaussianState(gamma, d)


def reduce_state(state: GaussianState, keep: Sequence[int]) -> GaussianState:
    """Partial trace keeping ``keep`` (ascending order, no duplicates)."""
    keep = sorted(set(int(k) for k in keep))
    if keep and (keep[0] < 0 or keep[-1] >= state.num_modes):
        raise ValueError("mode index out of range")
    idx = _quad_indices(keep)
    return GaussianState(state.covariance[np.ix_(idx, idx)], state.displacement[idx])


def vacuum_probability(state: GaussianState, modes: Sequence[int] | None = None) -> float:
    """Probability that every listed mode contains zero photons.

    Evaluates ``2^M / sqrt(det(I + gamma))`` on the reduced block through
    a Cholesky factorization (the block is symmetric positive definite
    for any physical state), with the standard Gaussian correction when
    the block is displaced.
    """
    if modes is None:
        modes = range(state.num_modes)
    modes = list(modes)
    if not modes:
        return 1.0
    red = reduce_state(state, modes)
    m = len(modes)
    a = np.eye(2 * m) + red.covariance
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalDomainError("I + gamma is not positive definite") from exc
    log_p = m * math.log(2.0) - float(np.sum(np.log(np.diag(chol))))
    d = red.displacement
    if np.any(d):
        # overlap with vacuum: exp(-d^T (gamma + I)^-1 d / 2)
        x = np.linalg.solve(a, d)
        log_p -= 0.5 * float(d @ x)
    return math.exp(log_p)


def mean_photon_numbers(state: GaussianState) -> np.ndarray:
    """Per-mode mean photon number, ``(Tr gamma_k - 2)/4 + |d_k|^2/4``."""
    gamma, d = state.covariance, state.displacement
    diag = np.diagonal(gamma)
    return (diag[0::2] + diag[1::2] - 2.0 + d[0::2] ** 2 + d[1::2] ** 2) / 4.0


def symplectic_eigenvalues(gamma: np.ndarray) -> np.ndarray:
    """Williamson spectrum: moduli of the eigenvalues of i Omega gamma.

    Returns the N values sorted ascending; a physical state has all of
    them >= 1.
    """
    gamma = np.asarray(gamma, dtype=float)
    n = gamma.shape[0] // 2
    if n == 0:
        return np.zeros(0)
    ev = np.linalg.eigvals(symplectic_form(n) @ gamma)
    # the spectrum comes in +/- i nu pairs, so every value shows up twice
    return np.sort(np.abs(ev.imag))[::2]

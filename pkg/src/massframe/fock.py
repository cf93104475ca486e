"""Truncated number-basis oracle for the operator identities and the Gaussian dynamics.

Quadratures follow x = (a + a^dag)/sqrt(2), p = i(a^dag - a)/sqrt(2), so the vacuum
has <x^2> = 1/2. Quadratic operators are formed in dimension d + 2 and then cut to
d, which makes every retained matrix element exact; only the exponentials feel the
truncation, and identities are checked on a guarded top-left block.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import DomainError, TruncationError, UsageError
from .params import SystemParams
from .quadratic import as_pipeline, hamiltonian_matrices
from .dynamics import TimeGrid, Trajectory

log = logging.getLogger(__name__)

MIN_DIM = 8
MAX_TWO_MODE_DIM = 40
TAIL_FRACTION = 0.1
TAIL_ABORT = 1e-4
NORM_TOL = 1e-9
DEFAULT_MARGIN = 2.0 / 3.0


def ladder(d: int) -> np.ndarray:
    if d < 2:
        raise DomainError("truncation dimension must be at least 2")
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1).astype(complex)


def quadrature(d: int):
    a = ladder(d)
    ad = a.conj().T
    return (a + ad) / np.sqrt(2), 1j * (ad - a) / np.sqrt(2)


def _quadratic_ops(d: int) -> dict:
    """x, p, x^2, p^2 and (xp + px)/2 with exact matrix elements in dimension d."""
    x, p = quadrature(d + 2)
    cut = lambda A: np.ascontiguousarray(A[:d, :d])
    return {
        "x": cut(x),
        "p": cut(p),
        "xx": cut(x @ x),
        "pp": cut(p @ p),
        "xp": cut(0.5 * (x @ p + p @ x)),
    }


def _hermitian_exp(G, scale):
    """exp(i * scale * G) for Hermitian G."""
    if np.max(np.abs(G - G.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(G))):
        raise DomainError("generator is not Hermitian")
    w, V = eigh(G)
    return (V * np.exp(1j * scale * w)) @ V.conj().T


def _guard(value, limit, name):
    if abs(value) > limit:
        warnings.warn(f"|{name}|={abs(value)} exceeds {limit}: truncation errors may dominate", stacklevel=3)


def dilation_unitary(u: float, d: int) -> np.ndarray:
    """exp(i (u/2)(x p + p x)); conjugation sends x -> e^u x, p -> e^{-u} p."""
    _guard(u, 0.5, "u")
    return _hermitian_exp(_quadratic_ops(d)["xp"], u)


def shear_unitary(c: float, d: int) -> np.ndarray:
    """exp(-i c x^2); conjugation sends p -> p + 2c x."""
    _guard(c, 0.5, "c")
    return _hermitian_exp(_quadratic_ops(d)["xx"], -c)


def guarded_block(d: int, margin_fraction: float = DEFAULT_MARGIN) -> int:
    return max(1, int(math.floor(d * (1.0 - margin_fraction) + 1e-9)))


def conjugation_residual(U, A, expected, margin_fraction: float = DEFAULT_MARGIN) -> float:
    """Max-norm of U A U^dag - expected on the guarded top-left block."""
    U, A, expected = (np.asarray(m) for m in (U, A, expected))
    if not (U.shape == A.shape == expected.shape) or U.shape[0] != U.shape[1]:
        raise UsageError(f"dimension mismatch: {U.shape}, {A.shape}, {expected.shape}")
    b = guarded_block(U.shape[0], margin_fraction)
    diff = U @ A @ U.conj().T - expected
    return float(np.max(np.abs(diff[:b, :b])))


def unitarity_residual(U) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def single_mode_moments(psi, d: int):
    """(<x>, <p>) and symmetrised covariance of a single-mode state vector."""
    ops = _quadratic_ops(d)
    ev = lambda A: np.vdot(psi, A @ psi)
    mx, mp = ev(ops["x"]).real, ev(ops["p"]).real
    cov = np.array(
        [
            [ev(ops["xx"]).real - mx * mx, ev(ops["xp"]).real - mx * mp],
            [ev(ops["xp"]).real - mx * mp, ev(ops["pp"]).real - mp * mp],
        ]
    )
    return np.array([mx, mp]), cov


def frame_direction_oracle(u: float, d: int = 60) -> dict:
    """Position variance of T_u|0> and the moment rule it implies.

    ``rule`` is "inverse" when the variance is e^{-2u}/2 (frame moments transform
    with the inverse Heisenberg map) and "forward" when it is e^{2u}/2.
    """
    if abs(u) > 0.3:
        warnings.warn("oracle calibrated for |u| <= 0.3", stacklevel=2)
    vac = np.zeros(d, dtype=complex)
    vac[0] = 1.0
    phi = dilation_unitary(u, d) @ vac
    _, cov = single_mode_moments(phi, d)
    var_x, var_p = cov[0, 0], cov[1, 1]
    inverse, forward = 0.5 * np.exp(-2 * u), 0.5 * np.exp(2 * u)
    rule = "inverse" if abs(var_x - inverse) <= abs(var_x - forward) else "forward"
    return {"var_x": var_x, "var_p": var_p, "rule": rule}


@dataclass
class TwoModeState:
    """Two-mode amplitudes, mode-1-major: index n1 * d + n2."""

    vec: np.ndarray
    d: int

    def __post_init__(self):
        self.vec = np.asarray(self.vec, dtype=complex).ravel()
        if self.vec.size != self.d**2:
            raise DomainError(f"state length {self.vec.size} != d^2 = {self.d**2}")
        if self.d < MIN_DIM:
            raise DomainError(f"truncation dimension must be at least {MIN_DIM}")

    @classmethod
    def coherent(cls, mu, d: int) -> "TwoModeState":
        """Product coherent state with quadrature means mu = (x1, x2, p1, p2)."""
        x1, x2, p1, p2 = mu
        return cls(np.kron(coherent_vector((x1 + 1j * p1) / np.sqrt(2), d),
                           coherent_vector((x2 + 1j * p2) / np.sqrt(2), d)), d)

    def amplitudes(self) -> np.ndarray:
        return self.vec.reshape(self.d, self.d)

    def tail_population(self, fraction: float = TAIL_FRACTION) -> float:
        probs = np.abs(self.amplitudes()) ** 2
        nt = max(1, int(math.ceil(fraction * self.d)))
        return float(max(probs[-nt:, :].sum(), probs[:, -nt:].sum()))


def coherent_vector(alpha: complex, d: int) -> np.ndarray:
    c = np.empty(d, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, d):
        c[n] = c[n - 1] * alpha / np.sqrt(n)
    return c


def _pair_ops(ops):
    """Single-mode factor pairs (A on mode 1, B on mode 2) for each symmetrised product z_a z_b."""
    I = np.eye(ops["x"].shape[0], dtype=complex)
    x, p = ops["x"], ops["p"]
    # z = (x1, x2, p1, p2)
    single = {0: (x, I), 1: (I, x), 2: (p, I), 3: (I, p)}
    pairs = {}
    for a in range(4):
        for b in range(a, 4):
            if (a, b) == (0, 0):
                pairs[a, b] = (ops["xx"], I)
            elif (a, b) == (1, 1):
                pairs[a, b] = (I, ops["xx"])
            elif (a, b) == (2, 2):
                pairs[a, b] = (ops["pp"], I)
            elif (a, b) == (3, 3):
                pairs[a, b] = (I, ops["pp"])
            elif (a, b) == (0, 2):
                pairs[a, b] = (ops["xp"], I)
            elif (a, b) == (1, 3):
                pairs[a, b] = (I, ops["xp"])
            else:
                A1, B1 = single[a]
                A2, B2 = single[b]
                pairs[a, b] = (A1 @ A2, B1 @ B2)
    return single, pairs


def two_mode_hamiltonian(S, d: int) -> np.ndarray:
    """Weyl-ordered operator for z^T S z / 2 on the truncated two-mode space."""
    _, pairs = _pair_ops(_quadratic_ops(d))
    H = np.zeros((d * d, d * d), dtype=complex)
    for (a, b), (A, B) in pairs.items():
        coeff = 0.5 * S[a, b] * (1 if a == b else 2)
        if coeff != 0.0:
            H += coeff * np.kron(A, B)
    return 0.5 * (H + H.conj().T)


def two_mode_moments(state: TwoModeState):
    """Means and symmetrised covariance of a two-mode state."""
    single, pairs = _pair_ops(_quadratic_ops(state.d))
    Psi = state.amplitudes()
    ev = lambda A, B: np.vdot(Psi, A @ Psi @ B.T).real
    mu = np.array([ev(*single[a]) for a in range(4)])
    sigma = np.empty((4, 4))
    for (a, b), (A, B) in pairs.items():
        sigma[a, b] = sigma[b, a] = ev(A, B) - mu[a] * mu[b]
    return mu, sigma


def two_mode_evolve(pipeline, p: SystemParams, psi0: TwoModeState, g: TimeGrid, d: int | None = None) -> Trajectory:
    """Evolve with the midpoint-frozen exponential exp(-i H(t_mid) h) and record moments.

    Aborts with ``TruncationError`` when the top levels of either mode hold more than
    ``TAIL_ABORT`` population.
    """
    pipeline = as_pipeline(pipeline)
    d = psi0.d if d is None else d
    if d != psi0.d:
        raise DomainError("state dimension does not match d")
    if d > MAX_TWO_MODE_DIM:
        raise DomainError(f"d={d} exceeds dense two-mode limit {MAX_TWO_MODE_DIM}")
    if psi0.tail_population() > 1e-8:
        raise TruncationError("initial state populates the truncation tail", time=g.t0)

    times = g.times
    mids = 0.5 * (times[:-1] + times[1:])
    S_mid = hamiltonian_matrices(pipeline, p, mids)
    state = TwoModeState(psi0.vec / np.linalg.norm(psi0.vec), d)
    mus = np.empty((len(times), 4))
    sigmas = np.empty((len(times), 4, 4))
    mus[0], sigmas[0] = two_mode_moments(state)
    for i, S in enumerate(S_mid):
        h = times[i + 1] - times[i]
        H = two_mode_hamiltonian(S, d)
        if not np.any(H.imag):
            H = H.real
        w, V = eigh(H, driver="evd")
        vec = V @ (np.exp(-1j * h * w) * (V.conj().T @ state.vec))
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            log.warning("renormalising two-mode state at t=%.6g (norm %.3e)", times[i + 1], norm)
            vec = vec / norm
        state = TwoModeState(vec, d)
        tail = state.tail_population()
        if tail > TAIL_ABORT:
            raise TruncationError(f"tail population {tail:.2e} at t={times[i + 1]}", time=float(times[i + 1]))
        mus[i + 1], sigmas[i + 1] = two_mode_moments(state)
    return Trajectory(times, mus, sigmas)

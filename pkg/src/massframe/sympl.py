"""Linear canonical frame maps and Gaussian moment transport.

Phase-space ordering is (x1, ..., xn, p1, ..., pn) with J = [[0, I], [-I, 0]].
A ``SymplecticMap`` holds the Heisenberg-picture action of a frame unitary U:
U z U^dagger = M z.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .quadratic import DIM, Pipeline, as_pipeline
from .params import SystemParams, scale_from_mass

SYMPLECTIC_TOL = 1e-9


def symplectic_form(dim: int = DIM) -> np.ndarray:
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


@dataclass(frozen=True)
class SymplecticMap:
    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        M.flags.writeable = False
        object.__setattr__(self, "M", M)

    def __matmul__(self, other: "SymplecticMap") -> "SymplecticMap":
        return SymplecticMap(self.M @ other.M)

    def inverse(self) -> "SymplecticMap":
        return SymplecticMap(symplectic_inverse(self.M))


def symplectic_inverse(M):
    """M^{-1} = -J M^T J, exact for symplectic M (batched over leading axes)."""
    J = symplectic_form(M.shape[-1])
    return -J @ np.swapaxes(M, -1, -2) @ J


def check_symplectic(M) -> float:
    """Max-norm residual of M^T J M - J."""
    M = getattr(M, "M", M)
    M = np.asarray(M, dtype=float)
    J = symplectic_form(M.shape[-1])
    return float(np.max(np.abs(np.swapaxes(M, -1, -2) @ J @ M - J)))


def scaling_map(u1, u2) -> SymplecticMap:
    """Heisenberg map of the squeeze T_u: x_j -> e^{u_j} x_j, p_j -> e^{-u_j} p_j."""
    return SymplecticMap(np.diag(np.exp([u1, u2, -u1, -u2])))


def shear_map(beta1, beta2) -> SymplecticMap:
    """Heisenberg map of a quadratic phase exp(-i sum_j (beta_j/2) x_j^2): p_j -> p_j + beta_j x_j."""
    M = np.eye(DIM)
    M[2, 0] = beta1
    M[3, 1] = beta2
    return SymplecticMap(M)


def frame_matrices(pipeline, p: SystemParams, t) -> np.ndarray:
    """Vectorised frame map, shape ``t.shape + (4, 4)``.

    The final frames use the unitary R T_u (squeeze first, then quadratic phase).
    Its Heisenberg map is scaling @ shear, since
    R T z T^dag R^dag = R (D z) R^dag = D (R z R^dag).
    """
    pipeline = as_pipeline(pipeline)
    t = np.asarray(t, dtype=float)
    M = np.zeros(t.shape + (DIM, DIM))
    if pipeline is Pipeline.DIRECT:
        M[...] = np.eye(DIM)
        return M
    s1 = scale_from_mass(p, 1, t, pipeline.scale_mode)
    s2 = scale_from_mass(p, 2, t, pipeline.scale_mode)
    u = (s1[0], s2[0])
    for j in range(2):
        M[..., j, j] = np.exp(u[j])
        M[..., j + 2, j + 2] = np.exp(-u[j])
    factor = pipeline.shear_factor
    if factor is not None:
        ud = (s1[1], s2[1])
        for j in range(2):
            # (D @ Shear)[p_j, x_j] = e^{-u_j} * beta_j
            M[..., j + 2, j] = np.exp(-u[j]) * factor * ud[j]
    return M


def frame_map(pipeline, p: SystemParams, t: float) -> SymplecticMap:
    return SymplecticMap(frame_matrices(pipeline, p, float(t)))


class Direction(str, Enum):
    TO_FRAME = "to_frame"
    TO_LAB = "to_lab"


@dataclass(frozen=True)
class GaussianState:
    """First and symmetrised second moments, Sigma_ab = <{dz_a, dz_b}>/2."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float)
        sigma = np.array(self.sigma, dtype=float)
        if sigma.shape != (mu.size, mu.size) or mu.size % 2:
            raise DomainError(f"incompatible moment shapes {mu.shape}, {sigma.shape}")
        mu.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def vacuum(cls, dim: int = DIM) -> "GaussianState":
        return cls(np.zeros(dim), 0.5 * np.eye(dim))

    @classmethod
    def displaced(cls, mu) -> "GaussianState":
        mu = np.asarray(mu, dtype=float)
        return cls(mu, 0.5 * np.eye(mu.size))

    def is_physical(self, tol: float = 1e-9) -> bool:
        return bool(np.min(symplectic_eigenvalues(self.sigma)) >= 0.5 - tol)


def push_state(s: GaussianState, M, direction=Direction.TO_FRAME) -> GaussianState:
    """Transport moments between lab and frame.

    For a frame state |phi> = U|psi> with Heisenberg map M,
    <z>_phi = <psi|U^dag z U|psi> = M^{-1} <z>_psi. TO_FRAME therefore applies
    M^{-1} and TO_LAB applies M.
    """
    M = np.asarray(getattr(M, "M", M), dtype=float)
    if check_symplectic(M) > SYMPLECTIC_TOL * max(1.0, np.max(np.abs(M)) ** 2):
        raise DomainError("push_state requires a symplectic map")
    direction = Direction(direction)
    Ms = symplectic_inverse(M) if direction is Direction.TO_FRAME else M
    return GaussianState(Ms @ s.mu, Ms @ s.sigma @ Ms.T)


def symplectic_eigenvalues(sigma) -> np.ndarray:
    """Sorted symplectic eigenvalues (moduli of the +/- eigenvalue pairs of iJ Sigma)."""
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape[-1] != sigma.shape[-2] or not np.allclose(
        sigma, np.swapaxes(sigma, -1, -2), rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(sigma)))
    ):
        raise DomainError("covariance must be symmetric")
    J = symplectic_form(sigma.shape[-1])
    # J Sigma is real with spectrum +/- i nu_k
    ev = np.sort(np.abs(np.linalg.eigvals(J @ sigma)), axis=-1)
    return ev[..., ::2]

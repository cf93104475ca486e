"""Hamiltonians of every frame as quadratic forms H = z^T S z / 2, z = (x1, x2, p1, p2).

A symmetrised product c (x p + p x) / 2 is stored through its Weyl symbol c x p,
i.e. as S[x, p] = S[p, x] = c.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import UsageError
from .params import RefMassMode, SystemParams, eval_family, scale_from_mass

X1, X2, P1, P2 = 0, 1, 2, 3
DIM = 4


class Pipeline(str, Enum):
    DIRECT = "direct"
    TILDE = "tilde"
    UNIT_MASS_TILDE = "unit_mass_tilde"
    PAPER_FINAL = "paper_final"
    CORRECTED_FINAL = "corrected_final"
    MACEDO_GUEDES = "macedo_guedes"

    @property
    def shear_factor(self) -> float | None:
        """beta_j / u_dot_j for the final frames, None otherwise."""
        return {Pipeline.PAPER_FINAL: 0.5, Pipeline.CORRECTED_FINAL: 1.0}.get(self)

    @property
    def scale_mode(self) -> RefMassMode | None:
        """Reference-mass mode forced by this pipeline (None: use the params' mode)."""
        return None if self is Pipeline.TILDE else RefMassMode.UNITY


def as_pipeline(pipeline) -> Pipeline:
    try:
        return Pipeline(pipeline)
    except ValueError:
        raise UsageError(f"unknown pipeline {pipeline!r}") from None


@dataclass(frozen=True)
class QuadraticForm:
    S: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.shape[-2:] != (DIM, DIM):
            raise UsageError(f"quadratic form must be {DIM}x{DIM}, got {S.shape}")
        if not np.all(np.isfinite(S)):
            raise UsageError("quadratic form has non-finite entries")
        S = 0.5 * (S + np.swapaxes(S, -1, -2))
        S.flags.writeable = False
        object.__setattr__(self, "S", S)

    def energy(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * np.einsum("...i,...ij,...j->...", z, self.S, z)

    def __add__(self, other):
        return QuadraticForm(self.S + other.S)

    def __sub__(self, other):
        return QuadraticForm(self.S - other.S)


def dilation_term(u_dot_1, u_dot_2) -> QuadraticForm:
    """Weyl form of -(u1'/2)(x1 p1 + p1 x1) - (u2'/2)(x2 p2 + p2 x2)."""
    S = np.zeros((DIM, DIM))
    S[X1, P1] = S[P1, X1] = -u_dot_1
    S[X2, P2] = S[P2, X2] = -u_dot_2
    return QuadraticForm(S)


def coupling_term(k, u1, u2) -> QuadraticForm:
    """k (x2 e^{u2} - x1 e^{u1})^2 / 2."""
    if k < 0:
        warnings.warn(f"negative coupling k={k}", stacklevel=2)
    S = np.zeros((DIM, DIM))
    S[X1, X1] = k * np.exp(2 * u1)
    S[X2, X2] = k * np.exp(2 * u2)
    S[X1, X2] = S[X2, X1] = -k * np.exp(u1 + u2)
    return QuadraticForm(S)


def hamiltonian_matrices(pipeline, p: SystemParams, t) -> np.ndarray:
    """Vectorised build: S(t) with shape ``t.shape + (4, 4)``."""
    pipeline = as_pipeline(pipeline)
    t = np.asarray(t, dtype=float)
    S = np.zeros(t.shape + (DIM, DIM))
    k = np.asarray(eval_family(p.k, t), dtype=float)
    if np.any(k < 0):
        warnings.warn("negative coupling k on requested times", stacklevel=2)
    w2 = [np.asarray(eval_family(p.freq(j), t), dtype=float) ** 2 for j in (1, 2)]

    if pipeline is Pipeline.DIRECT:
        m = [np.asarray(eval_family(p.mass(j), t), dtype=float) for j in (1, 2)]
        for j, (x, pp) in enumerate(((X1, P1), (X2, P2))):
            S[..., pp, pp] = 1.0 / m[j]
            S[..., x, x] = m[j] * w2[j] + k
        S[..., X1, X2] = S[..., X2, X1] = -k
        return S

    scales = [scale_from_mass(p, j, t, pipeline.scale_mode) for j in (1, 2)]
    u = [s[0] for s in scales]
    ud = [s[1] for s in scales]
    udd = [s[2] for s in scales]
    S[..., X1, X2] = S[..., X2, X1] = -k * np.exp(u[0] + u[1])

    for j, (x, pp) in enumerate(((X1, P1), (X2, P2))):
        coupling = k * np.exp(2 * u[j])
        if pipeline is Pipeline.TILDE:
            m = np.asarray(eval_family(p.mass(j + 1), t), dtype=float)
            S[..., pp, pp] = np.exp(-2 * u[j]) / m
            S[..., x, x] = m * w2[j] * np.exp(2 * u[j]) + coupling
            S[..., x, pp] = S[..., pp, x] = -ud[j]
        elif pipeline in (Pipeline.UNIT_MASS_TILDE, Pipeline.MACEDO_GUEDES):
            S[..., pp, pp] = 1.0
            S[..., x, x] = w2[j] + coupling
            if pipeline is Pipeline.UNIT_MASS_TILDE:
                S[..., x, pp] = S[..., pp, x] = -ud[j]
        elif pipeline is Pipeline.PAPER_FINAL:
            S[..., pp, pp] = 1.0
            S[..., x, x] = w2[j] - (ud[j] ** 2 - 2 * udd[j]) / 4 + coupling
        else:
            S[..., pp, pp] = 1.0
            S[..., x, x] = w2[j] - ud[j] ** 2 + udd[j] + coupling
    return S


def build_hamiltonian(pipeline, p: SystemParams, t: float) -> QuadraticForm:
    return QuadraticForm(hamiltonian_matrices(pipeline, p, float(t)))

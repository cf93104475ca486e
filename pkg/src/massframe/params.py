"""Time-dependent scalar parameters and the squeeze scale functions derived from the masses.

All quantities are dimensionless with hbar = 1. Every family evaluates on scalars or
numpy arrays of times.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError, ParamRangeError, UsageError

FD_STEP = 1e-5
MIN_POSITIVITY_SAMPLES = 1000


class ParamFamily:
    """Base class: subclasses provide ``value`` and ``derivatives``."""

    def value(self, t):
        raise NotImplementedError

    def derivatives(self, t):
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ParamFamily):
    c: float

    def value(self, t):
        return self.c + 0.0 * np.asarray(t, dtype=float)

    def derivatives(self, t):
        zero = 0.0 * np.asarray(t, dtype=float)
        return self.c + zero, zero, zero


@dataclass(frozen=True)
class Exponential(ParamFamily):
    """c0 * exp(gamma * t)."""

    c0: float
    gamma: float

    def value(self, t):
        return self.c0 * np.exp(self.gamma * np.asarray(t, dtype=float))

    def derivatives(self, t):
        f = self.value(t)
        return f, self.gamma * f, self.gamma**2 * f


@dataclass(frozen=True)
class PowerLaw(ParamFamily):
    """c0 * (1 + a t)**n."""

    c0: float
    a: float
    n: float

    def value(self, t):
        return self.c0 * (1.0 + self.a * np.asarray(t, dtype=float)) ** self.n

    def derivatives(self, t):
        base = 1.0 + self.a * np.asarray(t, dtype=float)
        c0, a, n = self.c0, self.a, self.n
        d1 = c0 * n * a * base ** (n - 1)
        d2 = c0 * n * (n - 1) * a**2 * base ** (n - 2)
        return c0 * base**n, d1, d2


@dataclass(frozen=True)
class Harmonic(ParamFamily):
    """c0 + A cos(nu t + phi)."""

    c0: float
    amplitude: float
    nu: float
    phi: float = 0.0

    def value(self, t):
        return self.c0 + self.amplitude * np.cos(self.nu * np.asarray(t, dtype=float) + self.phi)

    def derivatives(self, t):
        arg = self.nu * np.asarray(t, dtype=float) + self.phi
        A, nu = self.amplitude, self.nu
        return self.c0 + A * np.cos(arg), -A * nu * np.sin(arg), -A * nu**2 * np.cos(arg)


@dataclass(frozen=True)
class Tabulated(ParamFamily):
    """Sampled values, cubic-spline interpolated; derivatives by central differences."""

    samples: tuple
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = sorted((float(t), float(v)) for t, v in self.samples)
        if len(pts) < 5:
            raise UsageError("tabulated family needs at least 5 samples")
        ts = np.array([p[0] for p in pts])
        if np.any(np.diff(ts) <= 0):
            raise UsageError("tabulated sample times must be distinct")
        object.__setattr__(self, "samples", tuple(pts))
        object.__setattr__(self, "_spline", CubicSpline(ts, [p[1] for p in pts]))

    @property
    def t_range(self):
        return self.samples[0][0], self.samples[-1][0]

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.t_range
        if np.any(t < lo) or np.any(t > hi):
            raise ParamRangeError(f"t outside tabulated range [{lo}, {hi}]")
        return t

    def value(self, t):
        return self._spline(self._check(t))

    def derivatives(self, t):
        t = self._check(t)
        h = FD_STEP * np.maximum(1.0, np.abs(t))
        # the spline extrapolates smoothly, so stencils may straddle the range ends
        fm, f0, fp = self._spline(t - h), self._spline(t), self._spline(t + h)
        return f0, (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2


def eval_family(f: ParamFamily, t):
    return f.value(t)


def eval_derivatives(f: ParamFamily, t):
    """Return ``(f, f', f'')`` at ``t``."""
    return f.derivatives(t)


class RefMassMode(str, Enum):
    UNITY = "unity"
    GEOMETRIC_MEAN = "geometric_mean"


@dataclass(frozen=True)
class SystemParams:
    """Parameters of the two coupled oscillators on a time window.

    ``w1``/``w2`` are frequencies (they enter squared). ``ref_mass_mode`` picks the
    reference mass m(t) used by the general squeeze frame: 1, or sqrt(m1 m2).
    """

    m1: ParamFamily
    m2: ParamFamily
    w1: ParamFamily
    w2: ParamFamily
    k: ParamFamily
    window: tuple[float, float] = (0.0, 10.0)
    ref_mass_mode: RefMassMode = RefMassMode.UNITY

    def __post_init__(self):
        t0, t1 = map(float, self.window)
        if not t1 > t0:
            raise DomainError(f"window must satisfy t1 > t0, got {self.window}")
        object.__setattr__(self, "window", (t0, t1))
        object.__setattr__(self, "ref_mass_mode", RefMassMode(self.ref_mass_mode))
        grid = np.linspace(t0, t1, MIN_POSITIVITY_SAMPLES + 1)
        for name in ("m1", "m2"):
            vals = eval_family(getattr(self, name), grid)
            if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
                raise DomainError(f"mass {name} must be positive on window {self.window}")

    def mass(self, j: int) -> ParamFamily:
        return _pick(self.m1, self.m2, j)

    def freq(self, j: int) -> ParamFamily:
        return _pick(self.w1, self.w2, j)


def _pick(a, b, j):
    if j == 1:
        return a
    if j == 2:
        return b
    raise UsageError(f"oscillator index must be 1 or 2, got {j}")


def _log_mass_derivatives(f: ParamFamily, t):
    m, dm, ddm = eval_derivatives(f, t)
    if np.any(m <= 0):
        raise DomainError("nonpositive mass")
    return np.log(m), dm / m, ddm / m - (dm / m) ** 2


def scale_from_mass(p: SystemParams, j: int, t, mode: RefMassMode | None = None):
    """Squeeze scale u_j and its first two time derivatives.

    Unity mode gives u_j = -ln(m_j)/2; geometric-mean mode gives
    u_j = ln sqrt(m/m_j) with m = sqrt(m1 m2).
    """
    mode = p.ref_mass_mode if mode is None else RefMassMode(mode)
    L, dL, ddL = _log_mass_derivatives(p.mass(j), t)
    if mode is RefMassMode.UNITY:
        return -0.5 * L, -0.5 * dL, -0.5 * ddL
    L1, dL1, ddL1 = _log_mass_derivatives(p.m1, t)
    L2, dL2, ddL2 = _log_mass_derivatives(p.m2, t)
    return (
        0.25 * (L1 + L2) - 0.5 * L,
        0.25 * (dL1 + dL2) - 0.5 * dL,
        0.25 * (ddL1 + ddL2) - 0.5 * ddL,
    )


@dataclass(frozen=True)
class ScaleFunctions:
    """Evaluators for (u1, u1', u1'', u2, u2', u2'')."""

    params: SystemParams
    mode: RefMassMode | None = None

    def __call__(self, t):
        return scale_from_mass(self.params, 1, t, self.mode) + scale_from_mass(self.params, 2, t, self.mode)

    def evaluators(self) -> Sequence[Callable]:
        out = []
        for j in (1, 2):
            for i in range(3):
                out.append(lambda t, j=j, i=i: scale_from_mass(self.params, j, t, self.mode)[i])
        return out

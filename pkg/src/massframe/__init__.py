"""Canonical frames that remove time-dependent masses from two coupled oscillators."""

from .params import (
    Constant,
    Exponential,
    Harmonic,
    PowerLaw,
    RefMassMode,
    SystemParams,
    Tabulated,
    eval_derivatives,
    eval_family,
    scale_from_mass,
)
from .quadratic import Pipeline, QuadraticForm, build_hamiltonian, coupling_term, dilation_term
from .sympl import (
    Direction,
    GaussianState,
    SymplecticMap,
    check_symplectic,
    frame_map,
    push_state,
    scaling_map,
    shear_map,
    symplectic_eigenvalues,
)
from .dynamics import (
    TimeGrid,
    Trajectory,
    equivalence_residual,
    evolve,
    mg_discrepancy,
    propagator,
    single_oscillator_demo,
)

__version__ = "0.1.0"

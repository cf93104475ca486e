import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from massframe.errors import DomainError, ParamRangeError, UsageError
from massframe.params import (
    Constant,
    Exponential,
    Harmonic,
    PowerLaw,
    RefMassMode,
    ScaleFunctions,
    SystemParams,
    Tabulated,
    eval_derivatives,
    eval_family,
    scale_from_mass,
)

ANALYTIC = [
    Constant(2.5),
    Exponential(1.0, 0.2),
    Exponential(0.7, -0.35),
    PowerLaw(1.0, 1.0, 2),
    PowerLaw(1.3, 0.3, 2.5),
    Harmonic(1.0, 0.4, 1.3, 0.2),
]


def fd_oracle(f, t, h=1e-5):
    fm, f0, fp = (eval_family(f, s) for s in (t - h, t, t + h))
    return (fp - fm) / (2 * h), (fp - 2 * f0 + fm) / h**2


def test_eval_family_examples():
    assert eval_family(Constant(1.0), 3.7) == 1.0
    assert eval_family(Exponential(1.0, 0.2), 0.0) == 1.0
    assert eval_family(PowerLaw(1.0, 1.0, 2), 1.0) == pytest.approx(4.0, abs=1e-15)


def test_eval_derivatives_examples():
    np.testing.assert_allclose(eval_derivatives(Exponential(1.0, 0.2), 0.0), (1.0, 0.2, 0.04), rtol=1e-15)
    assert tuple(eval_derivatives(Constant(2.5), 11.0)) == (2.5, 0.0, 0.0)
    np.testing.assert_allclose(eval_derivatives(PowerLaw(1, 1, 2), 1.0), (4.0, 4.0, 2.0), rtol=1e-15)


def test_vectorised_evaluation():
    t = np.linspace(0, 3, 7)
    f, d1, d2 = eval_derivatives(Harmonic(1, 0.5, 2.0), t)
    assert f.shape == d1.shape == d2.shape == (7,)


@pytest.mark.parametrize("fam", ANALYTIC, ids=repr)
@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.0, 5.0))
def test_analytic_derivatives_match_finite_differences(fam, t):
    f, d1, d2 = eval_derivatives(fam, t)
    fd1, fd2 = fd_oracle(fam, t)
    # the second-difference roundoff floor is ~eps*|f|/h^2, so scale by max(|f''|, |f|)
    assert abs(fd1 - d1) <= 1e-6 * max(abs(d1), abs(f))
    assert abs(fd2 - d2) <= 1e-4 * max(abs(d2), abs(f))


def test_tabulated_matches_source_and_checks_range():
    ts = np.linspace(0, 2, 41)
    tab = Tabulated(tuple(zip(ts, np.exp(0.3 * ts))))
    f, d1, d2 = eval_derivatives(tab, 1.0)
    np.testing.assert_allclose([f, d1, d2], [math.exp(0.3), 0.3 * math.exp(0.3), 0.09 * math.exp(0.3)], rtol=2e-3)
    with pytest.raises(ParamRangeError):
        eval_family(tab, 2.5)
    with pytest.raises(UsageError):
        Tabulated(((0, 1), (1, 1), (2, 1), (3, 1)))


@pytest.mark.parametrize("t", [0.0, 1.7, 4.2])
def test_scale_from_mass_constant(t):
    p = SystemParams(Constant(1), Constant(3), Constant(1), Constant(1), Constant(0))
    assert tuple(scale_from_mass(p, 1, t)) == (0.0, 0.0, 0.0)


def test_scale_from_mass_examples():
    p = SystemParams(Exponential(1, 0.2), PowerLaw(1, 1, 2), Constant(1), Constant(1), Constant(0))
    np.testing.assert_allclose(scale_from_mass(p, 1, 2.0), (-0.2, -0.1, 0.0), atol=1e-15)
    np.testing.assert_allclose(scale_from_mass(p, 2, 1.0), (-math.log(2), -0.5, 0.25), atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.0, 10.0))
def test_unity_scale_inverts_mass(t):
    p = SystemParams(Harmonic(2.0, 0.7, 1.1), PowerLaw(0.5, 0.4, 1.5), Constant(1), Constant(1), Constant(0))
    for j in (1, 2):
        u = scale_from_mass(p, j, t)[0]
        assert math.exp(-2 * u) == pytest.approx(float(eval_family(p.mass(j), t)), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(t=st.floats(0.0, 10.0))
def test_geometric_mean_equal_masses_gives_zero_scale(t):
    m = Harmonic(2.0, 0.5, 0.9)
    p = SystemParams(m, m, Constant(1), Constant(1), Constant(0), ref_mass_mode=RefMassMode.GEOMETRIC_MEAN)
    for j in (1, 2):
        np.testing.assert_allclose(scale_from_mass(p, j, t), 0.0, atol=1e-15)


def test_geometric_mean_scale_derivatives_by_finite_differences():
    p = SystemParams(Exponential(1, 0.2), PowerLaw(1, 0.3, 2), Constant(1), Constant(1), Constant(0),
                     ref_mass_mode="geometric_mean")
    t, h = 1.3, 1e-4
    for j in (1, 2):
        u = lambda s: scale_from_mass(p, j, s)[0]
        _, ud, udd = scale_from_mass(p, j, t)
        assert ud == pytest.approx((u(t + h) - u(t - h)) / (2 * h), rel=1e-7)
        assert udd == pytest.approx((u(t + h) - 2 * u(t) + u(t - h)) / h**2, rel=1e-4)


def test_scale_functions_bundle(td_params):
    vals = ScaleFunctions(td_params)(1.0)
    assert len(vals) == 6
    assert vals[0] == pytest.approx(-0.1)
    assert [f(1.0) for f in ScaleFunctions(td_params).evaluators()] == pytest.approx(list(vals))


def test_nonpositive_mass_rejected():
    with pytest.raises(DomainError):
        SystemParams(Harmonic(0.5, 1.0, 1.0), Constant(1), Constant(1), Constant(1), Constant(0), (0, 10))
    with pytest.raises(DomainError):
        SystemParams(Constant(1), Constant(1), Constant(1), Constant(1), Constant(0), (1, 1))

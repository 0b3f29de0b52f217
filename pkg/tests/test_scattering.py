import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from decodetect import constants as const
from decodetect.scattering import (
    CoherenceWarning,
    ScatteringModel,
    TargetComposition,
    coherent_angular_integral,
    coherent_average_table,
    differential_cross_section,
    form_factor_sphere,
    total_cross_section,
)

SIG = const.cm2_to_m2(1e-30)


def _ff_direct(x):
    # radial integral of the uniform ball, the definition of the form factor
    val, _ = integrate.quad(lambda r: 3 * r * r * np.sinc(x * r / math.pi), 0, 1, epsabs=1e-14)
    return val


@pytest.mark.parametrize("x", [1e-4, 0.01, 0.5, 1.0, 3.0, 7.5, 20.0])
def test_form_factor_against_radial_integral(x):
    assert form_factor_sphere(x) == pytest.approx(_ff_direct(x), rel=1e-9, abs=1e-12)


def test_form_factor_zero():
    assert form_factor_sphere(0.0) == 1.0
    assert form_factor_sphere(4.493409457909064) == pytest.approx(0.0, abs=1e-12)


@given(st.floats(1e-4, 60.0))
def test_closed_average_matches_numeric(X):
    closed = float(coherent_average_table(2.0, np.array([X / 2.0]))[0])
    num, _ = coherent_angular_integral(X)
    assert closed == pytest.approx(num, rel=1e-8, abs=1e-12)


def test_pointlike_sigma_counting():
    comp = TargetComposition(197, 10, 0.0)
    coh = ScatteringModel(SIG, "pointlike", True)
    inc = ScatteringModel(SIG, "pointlike", False)
    assert coh.pointlike_sigma(comp) == pytest.approx(SIG * 197**2 * 100)
    assert inc.pointlike_sigma(comp) == pytest.approx(SIG * 197**2 * 10)


def test_long_wavelength_total_is_coherent_n2():
    comp = TargetComposition(197, 1000, 1e-9)
    m = const.ev_to_kg(1.0)
    s = total_cross_section(ScatteringModel(SIG), comp, 1e5, m, warn=False)
    assert s == pytest.approx(SIG * 197**2 * 1000**2, rel=1e-9)


def test_short_wavelength_total_is_incoherent():
    comp = TargetComposition(197, 1000, 1e-9)
    m = const.ev_to_kg(1e8)
    s = total_cross_section(ScatteringModel(SIG), comp, 3e5, m, warn=False)
    n = 1000
    X = 2 * m * 3e5 * 1e-9 / const.hbar
    # large-X tail of the solid-angle average of F^2 is 9 / (2 X^2)
    expect = n + n * (n - 1) * 9 / (2 * X**2)
    assert X > 500
    assert s / (SIG * 197**2) == pytest.approx(expect, rel=1e-5)
    assert s / (SIG * 197**2 * n) == pytest.approx(1.0, rel=1e-2)


def test_differential_integrates_to_total():
    comp = TargetComposition(28, 50, 4e-9)
    m = const.ev_to_kg(3e4)
    v = 2.5e5
    k = m * v
    model = ScatteringModel(SIG)
    val, _ = integrate.quad(
        lambda t: 2 * math.pi * differential_cross_section(model, comp, k * math.sqrt(2 * (1 - t))),
        -1, 1, epsrel=1e-11)
    assert total_cross_section(model, comp, v, m, warn=False) == pytest.approx(val, rel=1e-9)


def test_coherence_warning():
    comp = TargetComposition(197, 5000, 1e-10)
    with pytest.warns(CoherenceWarning):
        total_cross_section(ScatteringModel(const.cm2_to_m2(1e-20)), comp, 1e5,
                            const.ev_to_kg(1.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        total_cross_section(ScatteringModel(SIG), comp, 1e5, const.ev_to_kg(1.0))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        ScatteringModel(-1.0)
    with pytest.raises(ValueError):
        ScatteringModel(SIG, mode="wave")
    with pytest.raises(ValueError):
        TargetComposition(0.5, 1, 0)
    with pytest.raises(ValueError):
        differential_cross_section(ScatteringModel(SIG), TargetComposition(), -1.0)

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from decodetect import constants as const
from decodetect.core import gamma_from_exponent
from decodetect.gravwave import (
    GravSuperposition,
    grav_exponent,
    grav_exponent_planck_units,
    planck_crossover_mass,
)

BETA_1 = 1.0 - 1e-12


def test_planck_mass_crossover():
    g = grav_exponent(GravSuperposition(const.planck_mass, BETA_1))
    assert g.re == pytest.approx(1.0, rel=1e-9) and g.im == 0.0
    assert abs(gamma_from_exponent(g)) == pytest.approx(1 / math.e, rel=1e-9)


def test_zero_speed():
    g = grav_exponent(GravSuperposition(1.0, 0.0))
    assert g.re == 0.0 and gamma_from_exponent(g) == 1


def test_two_formulas_agree():
    s = GravSuperposition(const.amu_to_kg(1e6), 0.5)
    assert grav_exponent(s).re == pytest.approx(grav_exponent_planck_units(s).re, rel=1e-12)


def test_invalid():
    for kw in [dict(mass=1.0, beta=1.0), dict(mass=1.0, beta=-0.1), dict(mass=0.0, beta=0.5)]:
        with pytest.raises(ValueError):
            GravSuperposition(**kw)
    with pytest.raises(ValueError):
        planck_crossover_mass(0.0)
    with pytest.raises(ValueError):
        planck_crossover_mass(0.5, 0.0)


def test_crossover_examples():
    assert planck_crossover_mass(BETA_1, 1.0) == pytest.approx(const.planck_mass, rel=1e-9)
    assert planck_crossover_mass(0.1, 1.0) == pytest.approx(100 * const.planck_mass, rel=1e-12)


def test_round_trip_random():
    rng = np.random.default_rng(3)
    for beta, x in zip(rng.uniform(0.01, 0.99, 100), 10 ** rng.uniform(-6, 6, 100)):
        m = planck_crossover_mass(beta, x)
        assert grav_exponent(GravSuperposition(m, beta)).re == pytest.approx(x, rel=1e-12)


@given(st.floats(1e-12, 1.0), st.floats(0.01, 0.98))
def test_monotone(m, beta):
    a = grav_exponent(GravSuperposition(m, beta)).re
    assert grav_exponent(GravSuperposition(m * 1.01, beta)).re > a
    assert grav_exponent(GravSuperposition(m, beta + 0.01)).re > a


def test_planck_mass_microgram():
    assert 20.5 <= const.planck_mass / const.MICROGRAM <= 22.5

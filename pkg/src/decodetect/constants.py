"""Physical constants (SI) and boundary-unit conversions.

Everything inside the package is SI.  The helpers here are the only place
where amu, eV/c^2, km/s, cm^2 and GeV/cm^3 are turned into SI and back.
"""

import math

from scipy import constants as _sc

hbar = _sc.hbar
c = _sc.c
G = _sc.G
amu = _sc.physical_constants["atomic mass constant"][0]
eV = _sc.eV
planck_mass = math.sqrt(hbar * c / G)

KM_S = 1.0e3
CM2 = 1.0e-4
CM3 = 1.0e-6
MICROGRAM = 1.0e-9
GRAM_PER_CM2 = 10.0  # kg/m^2
DAYS_PER_YEAR = 365.25


def ev_to_kg(m_ev):
    """Mass given as eV/c^2 -> kg."""
    return m_ev * eV / c**2


def kg_to_ev(m_kg):
    return m_kg * c**2 / eV


def gev_to_kg(m_gev):
    return ev_to_kg(m_gev * 1.0e9)


def amu_to_kg(m_amu):
    return m_amu * amu


def kg_to_amu(m_kg):
    return m_kg / amu


def km_s_to_m_s(v):
    return v * KM_S


def m_s_to_km_s(v):
    return v / KM_S


def cm2_to_m2(sigma):
    return sigma * CM2


def m2_to_cm2(sigma):
    return sigma / CM2


def gev_cm3_to_kg_m3(rho):
    """Mass density GeV/c^2 per cm^3 -> kg/m^3."""
    return gev_to_kg(rho) / CM3


def kg_m3_to_gev_cm3(rho):
    return rho * CM3 / gev_to_kg(1.0)

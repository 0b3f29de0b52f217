"""Decoherence of a massive superposition by gravitational bremsstrahlung.

Only the scaling Gamma ~ alpha_G * beta^4, alpha_G = G m^2 / (hbar c), is
implemented; the order-unity prefactor is set to 1.  The path geometry
(extent L, recombination time tau) is carried as metadata only.
"""

import math
from dataclasses import dataclass

from . import constants as const
from .core import DecoherenceExponent

PREFACTOR = 1.0
FEASIBILITY_NOTE = (
    "blackbody decoherence is avoided by cooling below the temperature whose thermal "
    "wavelength exceeds L; electromagnetic bremsstrahlung by zero net charge; the "
    "gravitational channel cannot be switched off")


@dataclass(frozen=True)
class GravSuperposition:
    mass: float                     # kg
    beta: float                     # v/c
    extent: float | None = None     # m, metadata
    duration: float | None = None   # s, metadata

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("mass must be > 0")
        if not 0.0 <= self.beta < 1.0:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta}")


def coupling(mass):
    """Effective gravitational coupling G m^2 / (hbar c)."""
    return const.G * mass**2 / (const.hbar * const.c)


def grav_exponent(s):
    return DecoherenceExponent(PREFACTOR * coupling(s.mass) * s.beta**4, 0.0)


def grav_exponent_planck_units(s):
    """Same exponent written as (m / m_P)^2 beta^4."""
    return DecoherenceExponent(PREFACTOR * (s.mass / const.planck_mass) ** 2 * s.beta**4, 0.0)


def planck_crossover_mass(beta, target_exponent=1.0):
    """Mass (kg) at which the exponent reaches ``target_exponent`` for speed ``beta``."""
    if not 0.0 < beta < 1.0:
        raise ValueError("beta must lie in (0, 1)")
    if not target_exponent > 0:
        raise ValueError("target exponent must be > 0")
    return const.planck_mass * math.sqrt(target_exponent / PREFACTOR) / beta**2

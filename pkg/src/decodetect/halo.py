"""Standard-halo dark-matter flux in the laboratory frame.

Galactic-frame velocities ``u`` follow a Maxwellian exp(-u^2/v0^2) hard-cut
at ``v_esc``.  The lab moves through the halo with ``v_lab`` so that a
particle's lab velocity is ``v = u - v_lab``; the "wind" blows along
``-v_lab``.

Frame convention: +z is the Sun's direction of motion through the halo.  The
Earth's orbital plane contains the y axis and the unit vector
cos(i) z + sin(i) x, with i the orbit inclination; the orbital velocity is
parallel to the solar motion's in-plane projection at ``peak_day``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from . import constants as const


@dataclass(frozen=True)
class HaloModel:
    mass_density: float = const.gev_cm3_to_kg_m3(0.3)
    v0: float = 220.0e3
    v_esc: float = 550.0e3
    v_sun: float = 230.0e3
    orbit_speed: float = 29.8e3
    orbit_inclination: float = math.radians(60.0)
    peak_day: float = 152.5

    def __post_init__(self):
        if not self.mass_density > 0:
            raise ValueError("halo mass_density must be > 0")
        if not 0 < self.v0 < self.v_esc < const.c:
            raise ValueError("halo speeds must satisfy 0 < v0 < v_esc < c")
        if self.v_sun < 0 or self.orbit_speed < 0:
            raise ValueError("v_sun and orbit_speed must be >= 0")
        if self.orbit_speed > self.v_sun:
            raise ValueError("orbit_speed must not exceed v_sun")

    @classmethod
    def from_boundary_units(cls, rho_gev_cm3=0.3, v0_km_s=220.0, v_esc_km_s=550.0,
                            v_sun_km_s=230.0, orbit_speed_km_s=29.8,
                            orbit_inclination_deg=60.0, peak_day=152.5):
        return cls(
            mass_density=const.gev_cm3_to_kg_m3(rho_gev_cm3),
            v0=const.km_s_to_m_s(v0_km_s),
            v_esc=const.km_s_to_m_s(v_esc_km_s),
            v_sun=const.km_s_to_m_s(v_sun_km_s),
            orbit_speed=const.km_s_to_m_s(orbit_speed_km_s),
            orbit_inclination=math.radians(orbit_inclination_deg),
            peak_day=peak_day,
        )

    @property
    def norm(self):
        """Integral of exp(-u^2/v0^2) over the ball |u| < v_esc."""
        z = self.v_esc / self.v0
        return math.pi**1.5 * self.v0**3 * (
            erf(z) - 2.0 / math.sqrt(math.pi) * z * math.exp(-z * z))


@dataclass(frozen=True)
class WindState:
    v_lab: tuple
    epoch: float | None = None

    @property
    def vector(self):
        return np.asarray(self.v_lab, dtype=float)

    @property
    def speed(self):
        return float(np.linalg.norm(self.vector))

    @property
    def direction(self):
        """Unit vector along v_lab (+z if the lab is at rest in the halo)."""
        s = self.speed
        if s == 0.0:
            return np.array([0.0, 0.0, 1.0])
        return self.vector / s


def static_wind(halo):
    """Wind from the solar motion alone (no orbital term)."""
    return WindState((0.0, 0.0, halo.v_sun), None)


def wind_velocity(halo, day):
    """Lab velocity through the halo at ``day`` (day of year, circular orbit)."""
    if not np.isfinite(day):
        raise ValueError("day must be finite")
    phase = 2.0 * math.pi * (day - halo.peak_day) / const.DAYS_PER_YEAR
    inc = halo.orbit_inclination
    e1 = np.array([math.sin(inc), 0.0, math.cos(inc)])
    e2 = np.array([0.0, 1.0, 0.0])
    v = np.array([0.0, 0.0, halo.v_sun]) + halo.orbit_speed * (
        math.cos(phase) * e1 + math.sin(phase) * e2)
    return WindState(tuple(float(x) for x in v), float(day))


def number_density(halo, m_dm):
    """Number density (1/m^3) of particles of mass ``m_dm`` (kg)."""
    if not m_dm > 0:
        raise ValueError(f"dark-matter mass must be > 0, got {m_dm}")
    return halo.mass_density / m_dm


def velocity_pdf(halo, wind, v):
    """Lab-frame velocity density f(v) in s^3/m^3; ``v`` has shape (..., 3)."""
    u = np.asarray(v, dtype=float) + wind.vector
    u2 = np.sum(u * u, axis=-1)
    f = np.exp(-u2 / halo.v0**2) / halo.norm
    return np.where(u2 < halo.v_esc**2, f, 0.0)


def galactic_speed_pdf(halo, u):
    """Density of galactic-frame speed |u| (integrates to 1 over [0, v_esc])."""
    u = np.asarray(u, dtype=float)
    p = 4.0 * math.pi * u * u * np.exp(-(u / halo.v0) ** 2) / halo.norm
    return np.where((u >= 0) & (u < halo.v_esc), p, 0.0)


def sample_galactic_velocities(halo, n, rng):
    """Draw ``n`` galactic-frame velocities by rejection from the untruncated Maxwellian."""
    scale = halo.v0 / math.sqrt(2.0)
    out = np.empty((n, 3))
    filled = 0
    drawn = 0
    while filled < n:
        need = n - filled
        batch = rng.normal(0.0, scale, size=(int(need * 1.05) + 16, 3))
        drawn += len(batch)
        keep = batch[np.einsum("ij,ij->i", batch, batch) < halo.v_esc**2]
        take = min(len(keep), need)
        out[filled:filled + take] = keep[:take]
        filled += take
        if drawn > 1000 and filled / drawn < 1e-4:
            raise RuntimeError(
                f"rejection efficiency {filled / drawn:.2e} below 1e-4; check v0/v_esc")
    return out


def sample_lab_velocities(halo, wind, n, rng):
    return sample_galactic_velocities(halo, n, rng) - wind.vector

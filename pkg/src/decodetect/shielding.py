"""Atmospheric overburden: the largest cross-section still reaching a detector.

Dark matter that scatters too readily on the air above an experiment never
arrives.  The criterion used is an expected number of air scatterings

    N_col(h) * sigma_n * A_air^2 = n_crit * (m_N / m_dm)^p

with N_col the column of air nuclei above altitude h, A_air^2 the coherent
per-nucleus enhancement, and p an optional energy-degradation weighting.
"""

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import constants as const

SEA_LEVEL_ANCHOR_CM2 = 10.0**-28.5
# calibrate_n_crit(default_atmosphere()) with p = 0: sea-level ceiling at the anchor
DEFAULT_N_CRIT = 0.2853092891071943
N_CRIT_PROVENANCE = "calibrated: sea-level ceiling = 10^-28.5 cm^2, bundled US-1976 table, p = 0"


@dataclass(frozen=True)
class AtmosphereModel:
    altitudes: tuple            # m, strictly increasing
    columns: tuple              # g/cm^2 above each altitude
    mean_nucleus_A: float = 14.5

    def __post_init__(self):
        h = np.asarray(self.altitudes, dtype=float)
        col = np.asarray(self.columns, dtype=float)
        if h.ndim != 1 or h.shape != col.shape or len(h) < 2:
            raise ValueError("atmosphere table needs >= 2 matching rows")
        if h[0] != 0.0:
            raise ValueError("atmosphere table must start at altitude 0")
        if np.any(np.diff(h) <= 0):
            raise ValueError("atmosphere altitudes must be strictly increasing")
        if np.any(col <= 0) or np.any(np.diff(col) >= 0):
            raise ValueError("atmosphere column must be positive and strictly decreasing")
        if not 1000.0 <= col[0] <= 1060.0:
            raise ValueError(f"sea-level column {col[0]} g/cm^2 outside [1000, 1060]")
        if not self.mean_nucleus_A >= 1:
            raise ValueError("mean_nucleus_A must be >= 1")

    @property
    def nucleus_mass_g(self):
        return self.mean_nucleus_A * const.amu * 1e3


@dataclass(frozen=True)
class ShieldCriterion:
    n_crit: float
    mass_exponent: float = 0.0
    extra_column: float = 0.0   # g/cm^2 of additional air-equivalent shielding

    def __post_init__(self):
        if not self.n_crit > 0:
            raise ValueError("n_crit must be > 0")
        if not 0.0 <= self.mass_exponent <= 1.0:
            raise ValueError("mass_exponent must lie in [0, 1]")
        if self.extra_column < 0:
            raise ValueError("extra_column must be >= 0")


def read_atmosphere_csv(path, mean_nucleus_A=14.5):
    return parse_atmosphere_csv(Path(path).read_text(encoding="utf-8"), mean_nucleus_A)


def parse_atmosphere_csv(text, mean_nucleus_A=14.5):
    """Parse the ``altitude_m,column_g_cm2`` table."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["altitude_m", "column_g_cm2"]:
        raise ValueError("atmosphere CSV must start with header 'altitude_m,column_g_cm2'")
    alts, cols = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise ValueError(f"atmosphere CSV line {lineno}: expected 2 columns")
        try:
            alts.append(float(row[0]))
            cols.append(float(row[1]))
        except ValueError:
            raise ValueError(f"atmosphere CSV line {lineno}: non-numeric value") from None
    return AtmosphereModel(tuple(alts), tuple(cols), mean_nucleus_A)


def default_atmosphere(mean_nucleus_A=14.5):
    """US Standard Atmosphere 1976 pressures converted to overhead column P/g(h)."""
    text = resources.files(__package__).joinpath("data/atmosphere.csv").read_text("utf-8")
    return parse_atmosphere_csv(text, mean_nucleus_A)


def column_density(atm, altitude):
    """Air column (g/cm^2) above ``altitude`` (m)."""
    if not altitude >= 0:
        raise ValueError(f"altitude must be >= 0, got {altitude}")
    if math.isinf(altitude):
        return 0.0
    h = np.asarray(atm.altitudes)
    logc = np.log(np.asarray(atm.columns))
    if altitude <= h[-1]:
        return float(np.exp(np.interp(altitude, h, logc)))
    scale_height = (h[-1] - h[-2]) / (logc[-2] - logc[-1])
    return float(np.exp(logc[-1] - (altitude - h[-1]) / scale_height))


def nuclei_column(atm, altitude, extra_column=0.0):
    """Air nuclei per cm^2 above ``altitude``."""
    return (column_density(atm, altitude) + extra_column) / atm.nucleus_mass_g


def max_visible_sigma(atm, crit, m_dm, altitude):
    """Per-nucleon cross-section (cm^2) above which the flux is shielded."""
    if not m_dm > 0:
        raise ValueError("dark-matter mass must be > 0")
    n_col = nuclei_column(atm, altitude, crit.extra_column)
    if n_col == 0.0:
        return math.inf
    weight = (const.amu_to_kg(atm.mean_nucleus_A) / m_dm) ** crit.mass_exponent
    return crit.n_crit * weight / (n_col * atm.mean_nucleus_A**2)


def calibrate_n_crit(atm, sigma_cm2=SEA_LEVEL_ANCHOR_CM2, altitude=0.0,
                     mass_exponent=0.0, m_dm=None, extra_column=0.0):
    """n_crit that puts the ceiling at ``sigma_cm2`` for the given altitude."""
    n_col = nuclei_column(atm, altitude, extra_column)
    weight = 1.0
    if mass_exponent:
        if m_dm is None:
            raise ValueError("calibration with mass_exponent > 0 needs m_dm")
        weight = (const.amu_to_kg(atm.mean_nucleus_A) / m_dm) ** mass_exponent
    return sigma_cm2 * n_col * atm.mean_nucleus_A**2 / weight

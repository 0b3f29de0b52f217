"""Exclusion band in the (m_dm, sigma_n) plane.

Floor: the smallest sigma_n giving Re Gamma = 1 (|gamma| = 1/e) over the
campaign.  Because Gamma is exactly linear in sigma_n one rate evaluation
per mass suffices.  Ceiling: the shielding cut at the target's altitude.
"""

import csv
import hashlib
import io
import json
import math
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import constants as const
from .decoherence import (
    DEFAULT_SETTINGS,
    MODEL_TAG,
    PHASE_CONVENTION,
    QuadratureError,
    decoherence_rate,
    exponent,
)
from .shielding import max_visible_sigma

SIGMA_REF_CM2 = 1e-30
MASS_RANGE_EV = (1.0, 1.0e6)
POINTS_PER_DECADE = 33
INSENSITIVE = "insensitive"


@dataclass(frozen=True)
class FloorResult:
    """Floor cross-section in cm^2; ``math.inf`` with a flag when insensitive."""

    sigma_cm2: float
    gamma_ref: float            # Re Gamma at sigma_ref
    sigma_ref_cm2: float
    flag: str = ""

    @property
    def insensitive(self):
        return self.flag == INSENSITIVE


def campaign_exposure(target, per_shot=False):
    return target.exposure if per_shot else target.exposure * target.shots


def gamma_at(target, halo, wind, m_dm, sigma_cm2, per_shot=False, settings=DEFAULT_SETTINGS):
    """Re Gamma for the target at per-nucleon cross-section ``sigma_cm2``."""
    model = target.scattering_model(const.cm2_to_m2(sigma_cm2))
    rate = decoherence_rate(halo, wind, model, target.composition(), m_dm, target.dx, settings)
    return exponent(rate, campaign_exposure(target, per_shot)).re


def sensitivity_floor(target, halo, wind, m_dm, per_shot=False, sigma_ref_cm2=SIGMA_REF_CM2,
                      settings=DEFAULT_SETTINGS):
    """sigma_n (cm^2) at which Re Gamma = 1, from Re Gamma being linear in sigma_n."""
    g = gamma_at(target, halo, wind, m_dm, sigma_ref_cm2, per_shot, settings)
    if g <= 0.0:
        return FloorResult(math.inf, g, sigma_ref_cm2, INSENSITIVE)
    return FloorResult(sigma_ref_cm2 / g, g, sigma_ref_cm2)


def bisect_floor(gamma_of_sigma, lo_cm2, hi_cm2, rtol=1e-6):
    """Root of gamma_of_sigma(s) = 1 in log sigma, for models not linear in sigma."""
    def f(logs):
        return gamma_of_sigma(10.0**logs) - 1.0

    a, b = math.log10(lo_cm2), math.log10(hi_cm2)
    if f(a) * f(b) > 0:
        raise ValueError("bracket does not straddle Re Gamma = 1")
    return 10.0 ** brentq(f, a, b, xtol=rtol / math.log(10.0), rtol=4 * np.finfo(float).eps)


def mass_grid(min_ev=MASS_RANGE_EV[0], max_ev=MASS_RANGE_EV[1], points_per_decade=POINTS_PER_DECADE):
    """Log-spaced masses (eV/c^2) inside the supported 1 eV - 1 MeV range."""
    lo, hi = MASS_RANGE_EV
    if not lo <= min_ev <= max_ev <= hi:
        raise ValueError(f"mass grid must lie within [{lo:g}, {hi:g}] eV/c^2")
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be >= 1")
    if min_ev == max_ev:
        return np.array([float(min_ev)])
    n = int(round(math.log10(max_ev / min_ev) * points_per_decade)) + 1
    return np.logspace(math.log10(min_ev), math.log10(max_ev), max(n, 2))


# -- the scan ----------------------------------------------------------------------

@dataclass
class ExclusionGrid:
    masses: np.ndarray              # eV/c^2
    sigma_floor: np.ndarray         # cm^2 (inf where insensitive or failed)
    sigma_ceiling: np.ndarray       # cm^2
    flags: list
    metadata: dict = field(default_factory=dict)

    @property
    def band_open(self):
        return np.isfinite(self.sigma_floor) & (self.sigma_floor <= self.sigma_ceiling)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mass_eV", "sigma_floor_cm2", "sigma_ceiling_cm2", "flags"])
        for m, lo, hi, fl in zip(self.masses, self.sigma_floor, self.sigma_ceiling, self.flags):
            w.writerow([repr(float(m)), repr(float(lo)), repr(float(hi)), fl or "ok"])
        return buf.getvalue()

    def write(self, csv_path, overlay=None):
        """CSV plus ``<csv>.meta.json``; an overlay file is copied next to it untouched."""
        csv_path = Path(csv_path)
        text = self.to_csv()
        data = text.encode("utf-8")
        csv_path.write_bytes(data)
        meta = dict(self.metadata)
        meta["content_sha1"] = git_blob_sha1(data)
        if overlay is not None:
            dest = csv_path.with_name(csv_path.stem + ".overlay" + Path(overlay).suffix)
            shutil.copyfile(overlay, dest)
            meta["overlay"] = {"source": str(overlay), "copy": dest.name,
                               "sha1": git_blob_sha1(Path(overlay).read_bytes())}
        meta_path = csv_path.with_name(csv_path.name + ".meta.json")
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return meta_path


def read_grid_csv(path):
    rows = list(csv.reader(Path(path).read_text(encoding="utf-8").splitlines()))
    body = rows[1:]
    return ExclusionGrid(np.array([float(r[0]) for r in body]),
                         np.array([float(r[1]) for r in body]),
                         np.array([float(r[2]) for r in body]),
                         ["" if r[3] == "ok" else r[3] for r in body])


def git_blob_sha1(data):
    """Content hash as ``git hash-object`` would print it."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _scan_point(args):
    target, halo, wind, atm, crit, m_ev, per_shot, sigma_ref, settings = args
    m_dm = const.ev_to_kg(m_ev)
    ceiling = max_visible_sigma(atm, crit, m_dm, target.altitude)
    try:
        fl = sensitivity_floor(target, halo, wind, m_dm, per_shot, sigma_ref, settings)
        floor, flag = fl.sigma_cm2, fl.flag
    except QuadratureError as exc:
        floor, flag = math.inf, "quadrature-failure: " + str(exc).split(" (")[0]
    if not flag and floor > ceiling:
        flag = "empty"
    return floor, ceiling, flag


def exclusion_scan(target, halo, wind, atm, crit, masses_ev, per_shot=False,
                   sigma_ref_cm2=SIGMA_REF_CM2, settings=DEFAULT_SETTINGS, workers=1,
                   log=None):
    """Floor and ceiling at each mass; a failing mass is flagged and the scan goes on."""
    masses = np.asarray(masses_ev, dtype=float)
    if masses.ndim != 1 or len(masses) == 0:
        raise ValueError("mass grid must be a non-empty 1-D array")
    if np.any(np.diff(masses) <= 0):
        raise ValueError("mass grid must be strictly increasing")
    lo, hi = MASS_RANGE_EV
    if masses[0] < lo or masses[-1] > hi:
        raise ValueError(f"mass grid must lie within [{lo:g}, {hi:g}] eV/c^2")
    jobs = [(target, halo, wind, atm, crit, float(m), per_shot, sigma_ref_cm2, settings)
            for m in masses]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_point, jobs))
    else:
        results = []
        for job in jobs:
            results.append(_scan_point(job))
            if log is not None:
                m = job[5]
                log(f"m = {m:.4g} eV  floor = {results[-1][0]:.4g} cm^2  "
                    f"ceiling = {results[-1][1]:.4g} cm^2  {results[-1][2] or 'ok'}")
    floor = np.array([r[0] for r in results])
    ceiling = np.array([r[1] for r in results])
    flags = [r[2] for r in results]
    meta = {
        "model": MODEL_TAG,
        "phase_convention": PHASE_CONVENTION,
        "exposure": "per-shot" if per_shot else "per-campaign",
        "sigma_ref_cm2": sigma_ref_cm2,
        "rtol": settings.rtol,
        "target": target.name,
    }
    return ExclusionGrid(masses, floor, ceiling, flags, meta)

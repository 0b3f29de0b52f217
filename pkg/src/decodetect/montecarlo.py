"""Monte Carlo layer: rate oracle, shot outcomes and campaign time series.

Every random stream is numpy's Philox4x64-10 keyed by the user seed.  The
stream for a given piece of work is fixed by the counter alone, so results
do not depend on how shots or sample chunks are split across workers:

    counter = (0, index, 0, purpose)

with ``purpose`` 0 for rate-oracle sample chunks and 1 for shot outcomes.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import constants as const
from .core import DecoherenceExponent, dim_port_probability, gamma_from_exponent
from .decoherence import (
    DEFAULT_SETTINGS,
    MODEL_TAG,
    PHASE_CONVENTION,
    decoherence_rate,
    exponent,
    separation_vector,
)
from .halo import WindState, number_density, sample_lab_velocities, wind_velocity
from .scattering import TargetComposition, differential_cross_section

RNG_ALGORITHM = "Philox4x64-10"
_RATE_STREAM = 0
_SHOT_STREAM = 1
MC_CHUNK = 500_000
WIND_CACHE_KM_S = 0.1


def philox(seed, index, purpose):
    """Generator on the counter-derived substream ``index`` for ``purpose``."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, int(index), 0, purpose]))


# -- rate oracle ------------------------------------------------------------------

@dataclass(frozen=True)
class MCResult:
    F: complex
    se_re: float
    se_im: float
    samples: int

    @property
    def standard_error(self):
        return math.hypot(self.se_re, self.se_im)


def _pointlike_terms(v, dxv, m_dm, sigma):
    speed = np.linalg.norm(v, axis=1)
    phase = m_dm * (v @ dxv) / const.hbar
    kd = m_dm * speed * np.linalg.norm(dxv) / const.hbar
    return sigma * speed * (1.0 - np.exp(-1j * phase) * np.sinc(kd / math.pi))


def _extended_terms(v, dxv, m_dm, model, comp, rng):
    # one uniformly drawn outgoing direction per incoming velocity
    speed = np.linalg.norm(v, axis=1)
    n_out = rng.normal(size=v.shape)
    n_out /= np.linalg.norm(n_out, axis=1)[:, None]
    dq = m_dm * (speed[:, None] * n_out - v)
    dsig = differential_cross_section(model, comp, np.linalg.norm(dq, axis=1))
    return 4.0 * math.pi * dsig * speed * (1.0 - np.exp(1j * (dq @ dxv) / const.hbar))


def mc_rate(halo, wind, model, comp, m_dm, dx, samples, seed, chunk=MC_CHUNK):
    """Monte Carlo estimate of the decoherence rate F (1/s) and its standard error.

    ``dx`` follows the decoherence-module convention: a length along the
    lab velocity or a (length, angle) pair.
    """
    if samples < 1000:
        raise ValueError("mc_rate needs at least 1000 samples")
    if np.ndim(dx) == 0:
        length, angle = float(dx), 0.0
    else:
        length, angle = map(float, dx)
    comp = comp or TargetComposition()
    dxv = separation_vector(wind, length, angle)
    n = number_density(halo, m_dm)
    s1 = np.zeros(2)
    s2 = np.zeros(2)
    done = 0
    for i, start in enumerate(range(0, samples, chunk)):
        size = min(chunk, samples - start)
        rng = philox(seed, i, _RATE_STREAM)
        v = sample_lab_velocities(halo, wind, size, rng)
        if model.mode == "pointlike":
            t = _pointlike_terms(v, dxv, m_dm, model.pointlike_sigma(comp))
        else:
            t = _extended_terms(v, dxv, m_dm, model, comp, rng)
        parts = np.stack([t.real, t.imag])
        s1 += parts.sum(axis=1)
        s2 += (parts * parts).sum(axis=1)
        done += size
    mean = s1 / done
    var = np.maximum(s2 / done - mean**2, 0.0) * done / (done - 1)
    se = n * np.sqrt(var / done)
    return MCResult(complex(n * mean[0], n * mean[1]), float(se[0]), float(se[1]), done)


# -- shot statistics --------------------------------------------------------------

def shot_uniforms(n_shots, seed, first=0):
    """One uniform draw per shot, from the shot's own substream."""
    return np.array([philox(seed, first + i, _SHOT_STREAM).random() for i in range(n_shots)])


def simulate_outcomes(gammas, seed, first=0):
    """Dim (True) / bright (False) for each complex gamma."""
    p = np.array([dim_port_probability(g) for g in np.atleast_1d(gammas)])
    return shot_uniforms(len(p), seed, first) < p


def clopper_pearson(k, n, level=0.99):
    """Exact two-sided confidence interval for a binomial proportion."""
    if n < 1 or not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n, n >= 1")
    a = 1.0 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def binomial_acceptance(n, p, level=0.99):
    """Central interval of dim fractions k/n with probability >= ``level`` under Bin(n, p)."""
    a = 1.0 - level
    lo = stats.binom.ppf(a / 2, n, p)
    hi = stats.binom.isf(a / 2, n, p)
    return float(lo) / n, float(hi) / n


# -- campaigns --------------------------------------------------------------------

@dataclass
class CampaignResult:
    days: np.ndarray
    gammas: np.ndarray
    dim: np.ndarray
    seed: int
    rates: np.ndarray = None            # Re F per shot, 1/s
    metadata: dict = field(default_factory=dict)

    @property
    def n_shots(self):
        return len(self.dim)

    @property
    def dim_fraction(self):
        return float(np.mean(self.dim))

    def confidence_interval(self, level=0.99):
        return clopper_pearson(int(np.sum(self.dim)), self.n_shots, level)

    def summary(self):
        lo, hi = self.confidence_interval()
        return {
            "n_shots": self.n_shots,
            "dim_count": int(np.sum(self.dim)),
            "dim_fraction": self.dim_fraction,
            "dim_fraction_ci99": [lo, hi],
            "seed": int(self.seed),
            "rng": RNG_ALGORITHM,
        }

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["shot", "day", "gamma_re", "gamma_im", "outcome"])
        for i, (d, g, o) in enumerate(zip(self.days, self.gammas, self.dim)):
            w.writerow([i, repr(float(d)), repr(float(g.real)), repr(float(g.imag)),
                        "dim" if o else "bright"])
        return buf.getvalue()


def shot_days(n_shots, start_day, campaign_days):
    """Shots spread uniformly over the window (cell midpoints)."""
    return start_day + (np.arange(n_shots) + 0.5) * (campaign_days / n_shots)


def simulate_campaign(target, halo, model, m_dm, sigma_n, n_shots, start_day, seed,
                      campaign_days=const.DAYS_PER_YEAR, gamma_background=0.0,
                      settings=DEFAULT_SETTINGS):
    """Shot-by-shot simulation over an annual (or shorter) campaign.

    The separation keeps its orientation relative to the instantaneous wind,
    so a shot's rate depends on the epoch only through the lab speed.  Rates
    are cached on a 0.1 km/s speed grid and evaluated at the grid speed.
    """
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    if gamma_background < 0:
        raise ValueError("gamma_background must be >= 0")
    model = model.with_sigma(sigma_n)
    comp = target.composition()
    days = shot_days(n_shots, start_day, campaign_days)
    step = const.km_s_to_m_s(WIND_CACHE_KM_S)
    cache = {}
    rates = np.empty(n_shots)
    gammas = np.empty(n_shots, dtype=complex)
    background = DecoherenceExponent(gamma_background, 0.0)
    for i, day in enumerate(days):
        key = int(round(wind_velocity(halo, day).speed / step))
        if key not in cache:
            wind = WindState((0.0, 0.0, key * step), None)
            cache[key] = decoherence_rate(halo, wind, model, comp, m_dm, target.dx, settings)
        rate = cache[key]
        rates[i] = rate.re
        gammas[i] = gamma_from_exponent(exponent(rate, target.exposure) + background)
    dim = simulate_outcomes(gammas, seed)
    meta = {
        "model": MODEL_TAG,
        "phase_convention": PHASE_CONVENTION,
        "rng": RNG_ALGORITHM,
        "wind_cache_km_s": WIND_CACHE_KM_S,
        "rate_evaluations": len(cache),
    }
    return CampaignResult(days, gammas, dim, seed, rates, meta)


def quarter_mean_rates(result, center_day, half_width=365.25 / 8):
    """Mean Re F over shots within ``half_width`` days of ``center_day`` (cyclic)."""
    d = (result.days - center_day + 182.625) % 365.25 - 182.625
    sel = np.abs(d) <= half_width
    if not np.any(sel):
        raise ValueError("no shots in the requested window")
    return float(np.mean(result.rates[sel]))


def write_campaign(result, csv_path, json_path, config=None, version=None):
    """Campaign CSV plus summary/metadata JSON; byte-identical for identical inputs."""
    text = result.to_csv()
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    meta = {"summary": result.summary(), **result.metadata}
    if version is not None:
        meta["version"] = version
    if config is not None:
        meta["config"] = config
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")

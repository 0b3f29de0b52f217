"""Spin-independent s-wave elastic scattering off a cluster of nuclei.

A target is N identical nuclei of N_A nucleons each, spread uniformly over a
sphere of radius R.  Averaging over nucleus positions gives

    dsigma/dOmega(q) = sigma_n/(4 pi) * N_A^2 * [N + N(N-1) F(qR/hbar)^2]

with F the homogeneous-sphere form factor: the first term is the incoherent
sum over nuclei, the second the coherent enhancement that survives while the
momentum transfer cannot resolve the object.  Nuclei themselves are treated
as point-like and recoil is neglected (|p_out| = |p_in|).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import constants as const

FF_SERIES_CUTOFF = 1e-3


class CoherenceWarning(UserWarning):
    """Coherently enhanced cross-section exceeds the geometric one."""


@dataclass(frozen=True)
class ScatteringModel:
    """Per-nucleon cross-section (m^2) and target treatment.

    ``mode='pointlike'`` collapses the whole target into one isotropic
    scatterer; ``coherent`` then selects N^2 (in-phase) or N (independent
    nuclei) counting.  ``mode='extended'`` uses the form factor instead.
    """

    sigma_n: float
    mode: str = "extended"
    coherent: bool = True

    def __post_init__(self):
        if not self.sigma_n >= 0:
            raise ValueError(f"sigma_n must be >= 0, got {self.sigma_n}")
        if self.mode not in ("pointlike", "extended"):
            raise ValueError(f"unknown scattering mode {self.mode!r}")

    def with_sigma(self, sigma_n):
        return ScatteringModel(sigma_n, self.mode, self.coherent)

    def pointlike_sigma(self, comp):
        """Isotropic cross-section used by the point-like rate."""
        n_eff = comp.nucleus_count**2 if self.coherent else comp.nucleus_count
        return self.sigma_n * comp.nucleon_count**2 * n_eff


@dataclass(frozen=True)
class TargetComposition:
    nucleon_count: float = 1.0
    nucleus_count: float = 1.0
    radius: float = 0.0

    def __post_init__(self):
        if self.nucleon_count < 1 or self.nucleus_count < 1 or self.radius < 0:
            raise ValueError(
                "composition requires nucleon_count >= 1, nucleus_count >= 1, radius >= 0")

    @property
    def total_nucleons(self):
        return self.nucleon_count * self.nucleus_count


def form_factor_sphere(x):
    """Homogeneous-sphere form factor 3 (sin x - x cos x) / x^3."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) <= FF_SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    full = 3.0 * (np.sin(xs) - xs * np.cos(xs)) / xs**3
    out = np.where(small, 1.0 - x * x / 10.0, full)
    return out if out.ndim else float(out)


def _coherence_weights(model, comp):
    pref = model.sigma_n / (4.0 * math.pi) * comp.nucleon_count**2
    n = comp.nucleus_count
    return pref * n, pref * n * (n - 1.0)


def differential_cross_section(model, comp, q_transfer):
    """dsigma/dOmega (m^2/sr) at momentum transfer ``q_transfer`` (kg m/s)."""
    q = np.asarray(q_transfer, dtype=float)
    if np.any(q < 0):
        raise ValueError("momentum transfer must be >= 0")
    incoh, coh = _coherence_weights(model, comp)
    ff = form_factor_sphere(q * comp.radius / const.hbar)
    out = incoh + coh * ff**2
    return out if np.ndim(out) else float(out)


def coherent_angular_integral(k_radius):
    """(1/(2 p^2)) * int_0^{2p} F(qR/hbar)^2 q dq with X = 2pR/hbar = ``k_radius``.

    Equals the solid-angle average of F^2 over elastic outgoing directions;
    1 in the long-wavelength limit and -> 0 as X grows.
    Returns (value, abserr).
    """
    X = float(k_radius)
    if X <= FF_SERIES_CUTOFF:
        return 1.0 - X * X / 10.0, 0.0
    # substitute x = qR/hbar: (2/X^2) int_0^X F(x)^2 x dx
    breaks = list(np.arange(math.pi, X, math.pi)[:200])
    val, err = quad(lambda x: form_factor_sphere(x) ** 2 * x, 0.0, X,
                    limit=max(50, 4 * len(breaks) + 50),
                    points=breaks or None, epsabs=0.0, epsrel=1e-10)
    return 2.0 * val / X**2, 2.0 * err / X**2


def total_cross_section(model, comp, v, m_dm, warn=True):
    """Total elastic cross-section (m^2) at speed ``v`` for particle mass ``m_dm``."""
    if not v > 0 or not m_dm > 0:
        raise ValueError("speed and mass must be > 0")
    sigma, _ = total_cross_section_with_error(model, comp, v, m_dm)
    if warn and comp.radius > 0 and sigma > math.pi * comp.radius**2:
        warnings.warn(
            f"total cross-section {sigma:.3e} m^2 exceeds geometric pi R^2 = "
            f"{math.pi * comp.radius**2:.3e} m^2; Born-level enhancement is not unitarised",
            CoherenceWarning, stacklevel=2)
    return sigma


def total_cross_section_with_error(model, comp, v, m_dm):
    incoh, coh = _coherence_weights(model, comp)
    k_radius = 2.0 * m_dm * v * comp.radius / const.hbar
    avg, err = coherent_angular_integral(k_radius)
    return 4.0 * math.pi * (incoh + coh * avg), 4.0 * math.pi * coh * err


def total_cross_section_array(model, comp, v, m_dm):
    """Vectorised total cross-section over an array of speeds."""
    v = np.asarray(v, dtype=float)
    incoh, coh = _coherence_weights(model, comp)
    if comp.radius == 0.0 or coh == 0.0:
        return np.full_like(v, 4.0 * math.pi * (incoh + coh))
    avg = coherent_average_table(2.0 * m_dm * comp.radius / const.hbar, v)
    return 4.0 * math.pi * (incoh + coh * avg)


def coherent_average_table(k_per_speed, v):
    """Vectorised ``coherent_angular_integral`` on X = k_per_speed * v.

    Uses the closed form of int F^2 x dx so the hot loop avoids per-point quad.
    """
    X = k_per_speed * np.asarray(v, dtype=float)
    return _coherent_average_closed(X)


def _coherent_average_closed(X):
    # (2/X^2) int_0^X 9 (sin x - x cos x)^2 / x^5 dx
    #   = 9 (2X^4 - 2X^2 + 2X sin 2X + cos 2X - 1) / (4 X^6)
    # The closed form cancels badly near 0, so switch to the Taylor series there.
    X = np.asarray(X, dtype=float)
    out = np.empty_like(X)
    small = X < 0.3
    x2 = X[small] ** 2
    out[small] = 1.0 + x2 * (-1.0 / 10 + x2 * (1.0 / 175 + x2 * (
        -1.0 / 4725 + x2 * (2.0 / 363825 - x2 / 9459450))))
    xl = X[~small]
    out[~small] = 9.0 * (2 * xl**4 - 2 * xl**2 + 2 * xl * np.sin(2 * xl)
                         + np.cos(2 * xl) - 1.0) / (4.0 * xl**6)
    return out

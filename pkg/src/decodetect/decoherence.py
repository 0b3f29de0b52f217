"""Complex decoherence rate F(dx) of a two-path superposition in a halo flux.

Adopted model (recoilless, elastic, Born level):

    F(dx) = n * int d^3v f(v) |v| int dOmega' dsigma/dOmega'(dq) [1 - exp(i dq.dx/hbar)]

with dq = m (v' - v) and |v'| = |v|.  For an isotropic (point-like) scatterer
the outgoing-angle integral closes:

    F(dx) = n sigma * int d^3v f(v) |v| [1 - exp(-i m v.dx/hbar) sinc(m |v| |dx|/hbar)]

Sign convention: the phase factor is exp(-i m v.dx / hbar); with dx pointing
along the lab velocity (into the wind) Im F is then negative.  Only |Im F| is
physically meaningful here.

Velocity integrals use lab-frame spherical coordinates with the polar axis on
the lab velocity.  The escape-speed cut becomes an upper limit on the polar
cosine, so the integration region is a rectangle after an affine map.  The
azimuth around the wind is done analytically (a Bessel J0) whenever the
integrand allows it.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import cubature, quad
from scipy.special import j0, spherical_jn

from . import constants as const
from .core import DecoherenceExponent
from .halo import number_density
from .scattering import (
    TargetComposition,
    _coherence_weights,
    coherent_average_table,
    form_factor_sphere,
)

MODEL_TAG = "collisional-sWave-recoilless-v1"
PHASE_CONVENTION = "exp(-i m v.dx/hbar)"

class QuadratureError(RuntimeError):
    """Velocity quadrature did not reach tolerance; ``partial`` holds the estimate."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class QuadratureSettings:
    rtol: float = 1e-4
    max_evaluations: int = 100_000_000
    max_partial_waves: int = 20000
    chunk: int = 4096

    def __post_init__(self):
        if not 0 < self.rtol < 1:
            raise ValueError("rtol must lie in (0, 1)")
        if self.max_evaluations < 1000:
            raise ValueError("max_evaluations must be >= 1000")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass(frozen=True)
class RateResult:
    """Complex decoherence rate (1/s) with its absolute error estimate."""

    F: complex
    quadrature_error: float = 0.0
    evaluations: int = 0

    @property
    def re(self):
        return self.F.real

    @property
    def im(self):
        return self.F.imag

    def scaled(self, factor):
        return replace(self, F=self.F * factor, quadrature_error=self.quadrature_error * abs(factor))


# -- numerically stable pieces ------------------------------------------------

def one_minus_cos(x):
    return 2.0 * np.sin(0.5 * x) ** 2


def sinc(x):
    return np.sinc(np.asarray(x) / math.pi)


def one_minus_sinc(x):
    x = np.asarray(x, dtype=float)
    x2 = x * x
    small = np.abs(x) < 0.1
    xs = np.where(small, 1.0, x)
    series = x2 * (1.0 / 6 - x2 * (1.0 / 120 - x2 / 5040))
    return np.where(small, series, 1.0 - np.sin(xs) / xs)


def one_minus_j0(x):
    x = np.asarray(x, dtype=float)
    x2 = x * x
    series = x2 * (0.25 - x2 * (1.0 / 64 - x2 / 2304))
    return np.where(np.abs(x) < 0.1, series, 1.0 - j0(x))


def _one_minus_product(*eps):
    """1 - prod(1 - e_i) without cancellation for small e_i."""
    keep = np.ones_like(eps[0])
    total = np.zeros_like(eps[0])
    for e in eps:
        total = total + keep * e
        keep = keep * (1.0 - e)
    return total


def decoherence_kernel(a_par, a_perp, kd):
    """1 - exp(-i a_par) J0(a_perp) sinc(kd), as (re, im) arrays.

    ``a_par`` is the phase k.dx along the wind-projected axis, ``a_perp`` the
    Bessel argument left after the analytic azimuth average and ``kd = k|dx|``.
    """
    re = _one_minus_product(one_minus_cos(a_par), one_minus_j0(a_perp), one_minus_sinc(kd))
    im = np.sin(a_par) * j0(a_perp) * sinc(kd)
    return re, im


# -- geometry -------------------------------------------------------------------

class _VelocityFrame:
    """Dimensionless lab-frame coordinates: speeds in units of v0."""

    def __init__(self, halo, wind):
        self.halo = halo
        self.X = wind.speed / halo.v0
        self.X_esc = halo.v_esc / halo.v0
        self.norm = halo.norm / halo.v0**3

    def segments(self):
        X, Xe = self.X, self.X_esc
        segs = []
        if Xe - X > 0:
            segs.append((0.0, Xe - X))
        if X > 0:
            segs.append((abs(Xe - X), Xe + X))
        return segs

    def c_max(self, x):
        if self.X == 0.0:
            return np.ones_like(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            cm = (self.X_esc**2 - x * x - self.X**2) / (2.0 * x * self.X)
        return np.clip(np.nan_to_num(cm, nan=1.0, posinf=1.0, neginf=-1.0), -1.0, 1.0)

    def weight(self, x, w):
        """Map w in [0,1] to c in [-1, c_max(x)]; return (c, x^3 f * jacobian)."""
        cm = self.c_max(x)
        c = -1.0 + (cm + 1.0) * w
        dens = np.exp(-(x * x + self.X**2 + 2.0 * x * self.X * c)) / self.norm
        return c, x**3 * dens * (cm + 1.0)

    def speed_density(self, x):
        """Density of |v|/v0 with the polar cosine integrated analytically."""
        x = np.asarray(x, dtype=float)
        cm = self.c_max(x)
        if self.X == 0.0:
            ang = 2.0 * np.exp(-x * x)
        else:
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                b = 2.0 * x * self.X
                ang = np.exp(-(x - self.X) ** 2) * -np.expm1(-b * (cm + 1.0)) / b
                ang = np.where(b < 1e-12, (cm + 1.0) * np.exp(-x * x - self.X**2), ang)
        return 2.0 * math.pi * x * x * ang / self.norm


def _orientation(dx):
    """|dx| and the angle of dx to the wind axis; ``dx`` is (length, angle) or a scalar."""
    if np.ndim(dx) == 0:
        return float(dx), 0.0
    length, angle = dx
    return float(length), float(angle)


def mean_speed(halo, wind):
    """<|v|> of the lab-frame distribution, by 1-D quadrature of the speed density."""
    return speed_average(halo, wind, lambda v: v)


def speed_average(halo, wind, func):
    """<func(|v|)> over the lab-frame velocity distribution."""
    frame = _VelocityFrame(halo, wind)
    total = 0.0
    for lo, hi in frame.segments():
        val, _ = quad(lambda x: frame.speed_density(x) * func(x * halo.v0), lo, hi,
                      epsabs=0.0, epsrel=1e-11, limit=200)
        total += val
    return total


def total_scattering_rate(halo, wind, model, comp, m_dm):
    """n <sigma_tot |v|>: the resolving-limit value of Re F (1/s)."""
    comp = comp or TargetComposition()
    n = number_density(halo, m_dm)
    if model.mode == "pointlike":
        return n * model.pointlike_sigma(comp) * mean_speed(halo, wind)
    incoh, coh = _coherence_weights(model, comp)
    kr = 2.0 * m_dm * comp.radius / const.hbar

    def sigma_tot(v):
        return 4.0 * math.pi * (incoh + coh * float(coherent_average_table(kr, np.array([v]))[0]))

    return n * speed_average(halo, wind, lambda v: sigma_tot(v) * v)


# -- adaptive driver ------------------------------------------------------------

class _Counter:
    def __init__(self, func):
        self.func = func
        self.calls = 0

    def __call__(self, pts):
        self.calls += len(pts)
        return self.func(pts)


def _integrate(func, lows, highs, settings, scale_hint=None):
    """Adaptive 2-D cubature of a (re, im) integrand; returns (value, error, evaluations, ok)."""
    # gk21 tensor rule: 441 points per region, 4 children per split
    max_sub = max(1, settings.max_evaluations // (441 * 4 * 2))
    counted = _Counter(func)
    # coarse pass on Re fixes the absolute scale, so that a vanishing Im
    # (e.g. dx perpendicular to the wind) cannot stall the relative test
    pilot = cubature(lambda p: counted(p)[:, 0], lows, highs, rule="gk21",
                     rtol=max(settings.rtol, 1e-2), atol=0.0, max_subdivisions=max_sub)
    scale = abs(float(pilot.estimate))
    if scale_hint is not None:
        scale = max(scale, settings.rtol * scale_hint)
    res = cubature(counted, lows, highs, rule="gk21", rtol=settings.rtol,
                   atol=0.1 * settings.rtol * scale, max_subdivisions=max_sub)
    est, err = np.asarray(res.estimate, dtype=float), np.asarray(res.error, dtype=float)
    return complex(est[0], est[1]), math.hypot(err[0], err[1]), counted.calls, \
        res.status == "converged"


def _run_segments(frame, integrand, settings, prefactor, scale_hint=None):
    total, err, evals, ok = 0.0j, 0.0, 0, True
    for lo, hi in frame.segments():
        v, e, n, good = _integrate(integrand, np.array([lo, 0.0]), np.array([hi, 1.0]),
                                   settings, scale_hint)
        total += v
        err += e
        evals += n
        ok = ok and good
    result = RateResult(prefactor * total, abs(prefactor) * err, evals)
    if not ok or evals > settings.max_evaluations:
        raise QuadratureError(
            f"velocity quadrature did not converge within {settings.max_evaluations} "
            f"evaluations (estimate {result.F:.6e} +/- {result.quadrature_error:.2e})",
            partial=result)
    return result


def _chunked(func, pts, chunk):
    if len(pts) <= chunk:
        return func(pts)
    return np.concatenate([func(pts[i:i + chunk]) for i in range(0, len(pts), chunk)])


# -- rates ------------------------------------------------------------------------

def rate_pointlike(halo, wind, model, m_dm, dx, comp=None, settings=DEFAULT_SETTINGS):
    """Decoherence rate for an isotropic scatterer.

    ``dx`` is either a separation length (m, along the wind) or a pair
    ``(length, angle)`` with the angle in radians between dx and the lab
    velocity.  The cross-section is ``model.pointlike_sigma(comp)``.
    """
    if not m_dm > 0:
        raise ValueError("dark-matter mass must be > 0")
    length, angle = _orientation(dx)
    if length < 0:
        raise ValueError("separation must be >= 0")
    comp = comp or TargetComposition()
    sigma = model.pointlike_sigma(comp)
    if length == 0.0 or sigma == 0.0:
        return RateResult(0j, 0.0, 0)
    frame = _VelocityFrame(halo, wind)
    K = m_dm * halo.v0 * length / const.hbar
    cb, sb = math.cos(angle), math.sin(angle)

    def integrand(pts):
        x, w = pts[:, 0], pts[:, 1]
        c, wt = frame.weight(x, w)
        s = np.sqrt(np.clip(1.0 - c * c, 0.0, None))
        re, im = decoherence_kernel(K * x * c * cb, K * x * s * sb, K * x)
        return np.stack([wt * re, wt * im], axis=1)

    pref = 2.0 * math.pi * number_density(halo, m_dm) * sigma * halo.v0
    return _run_segments(frame, integrand, settings, pref)


def partial_wave_count(kr):
    """Number of Legendre terms needed for a form-factor weight at k R = ``kr``.

    The moments of F(2kR sin(theta/2))^2 fall off faster than exponentially
    once l exceeds ~2kR; 2.4 kR + 12 keeps the dropped tail below ~1e-11.
    """
    return int(math.ceil(2.4 * kr + 12))


def legendre_table(t, lmax):
    """P_0..P_lmax evaluated at ``t``; shape (lmax + 1, *t.shape)."""
    t = np.asarray(t, dtype=float)
    P = np.empty((lmax + 1,) + t.shape)
    P[0] = 1.0
    if lmax >= 1:
        P[1] = t
    for l in range(1, lmax):
        P[l + 1] = ((2 * l + 1) * t * P[l] - l * P[l - 1]) / (l + 1)
    return P


def form_factor_moments(kr, lmax):
    """g_l = int_{-1}^{1} F(kR sqrt(2(1-t)))^2 P_l(t) dt for l = 0..lmax.

    ``kr`` is a 1-D array; returns shape (len(kr), lmax + 1).  g_0 comes from
    the closed form, the rest from Gauss-Legendre in s = sin(theta/2).
    """
    kr = np.asarray(kr, dtype=float)
    n_nodes = lmax + 2 * int(math.ceil(2.0 * float(np.max(kr, initial=0.0)))) + 24
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w * 4.0 * s
    G = form_factor_sphere(2.0 * kr[:, None] * s[None, :]) ** 2
    g = (G * w) @ legendre_table(1.0 - 2.0 * s * s, lmax).T
    g[:, 0] = 2.0 * coherent_average_table(2.0, kr)
    return g


def coherent_kernel(kd, kr, cos_a, lmax=None):
    """int dOmega' F(|dq| R/hbar)^2 [1 - exp(i dq.dx/hbar)] / (2 pi), as (re, im, tail).

    Arrays over outer points: ``kd = k|dx|``, ``kr = kR`` and the cosine of
    the angle between v and dx.  Expanding the plane wave in partial waves and
    applying Funk-Hecke,

        int dOmega' F^2 exp(i dq.dx) = 2 pi exp(-i kd cos_a)
            * sum_l (2l+1) i^l j_l(kd) g_l P_l(cos_a),

    and the l = 0 term is folded into the cancellation-free decoherence
    kernel.  ``tail`` bounds the dropped partial waves.
    """
    kd = np.asarray(kd, dtype=float)
    kr = np.asarray(kr, dtype=float)
    if lmax is None:
        lmax = partial_wave_count(float(np.max(kr, initial=0.0)))
    # kd and kr both scale with the speed, so distinct speeds share moments
    key = np.stack([kd, kr], axis=1)
    uniq, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    g = form_factor_moments(uniq[:, 1], lmax)
    ell = np.arange(lmax + 1)
    jl = spherical_jn(ell[None, :], uniq[:, 0:1])
    coeff = (2 * ell + 1) * jl * g
    coeff[:, 0] = 0.0
    # i^l -> real part from even l, imaginary from odd l
    sign = np.array([1.0, 1.0, -1.0, -1.0])[ell % 4]
    even = (ell % 2 == 0)
    c_re = np.where(even, coeff * sign, 0.0)
    c_im = np.where(~even, coeff * sign, 0.0)
    P = legendre_table(cos_a, lmax)
    t_re = np.einsum("nl,ln->n", c_re[inv], P)
    t_im = np.einsum("nl,ln->n", c_im[inv], P)
    psi0 = kd * cos_a
    k_re, k_im = decoherence_kernel(psi0, np.zeros_like(kd), kd)
    g0 = g[inv, 0]
    cp, sp = np.cos(psi0), np.sin(psi0)
    h_re = g0 * k_re - (cp * t_re + sp * t_im)
    h_im = g0 * k_im - (cp * t_im - sp * t_re)
    tail = np.abs(coeff[inv, -1]) + np.abs(coeff[inv, -2]) if lmax >= 2 else np.zeros_like(kd)
    return h_re, h_im, tail


def rate_extended(halo, wind, model, comp, m_dm, dx, settings=DEFAULT_SETTINGS):
    """Decoherence rate for a homogeneous sphere of nuclei (coherent + incoherent)."""
    if not m_dm > 0:
        raise ValueError("dark-matter mass must be > 0")
    length, angle = _orientation(dx)
    if length < 0:
        raise ValueError("separation must be >= 0")
    incoh, coh = _coherence_weights(model, comp)
    if length == 0.0 or model.sigma_n == 0.0:
        return RateResult(0j, 0.0, 0)
    frame = _VelocityFrame(halo, wind)
    k_unit = m_dm * halo.v0 / const.hbar
    K, KR = k_unit * length, k_unit * comp.radius
    x_top = frame.X_esc + frame.X
    if partial_wave_count(KR * x_top) > settings.max_partial_waves:
        raise QuadratureError(
            f"k R = {KR * x_top:.3g} needs more than {settings.max_partial_waves} partial waves")
    cb, sb = math.cos(angle), math.sin(angle)
    along = abs(sb) < 1e-12
    inner_rel = [0.0]

    def body(x, c, cos_a, a_par, a_perp):
        re_p, im_p = decoherence_kernel(a_par, a_perp, K * x)
        out_re = 4.0 * math.pi * incoh * re_p
        out_im = 4.0 * math.pi * incoh * im_p
        if coh > 0.0:
            h_re, h_im, h_err = coherent_kernel(K * x, KR * x, cos_a)
            out_re = out_re + 2.0 * math.pi * coh * h_re
            out_im = out_im + 2.0 * math.pi * coh * h_im
            ref = 4.0 * math.pi * (incoh + coh * coherent_average_table(2.0 * KR, x))
            inner_rel[0] = max(inner_rel[0], float(np.max(2.0 * math.pi * coh * h_err / ref)))
        return out_re, out_im

    if along:
        def integrand2(pts):
            x, w = pts[:, 0], pts[:, 1]
            c, wt = frame.weight(x, w)
            re, im = body(x, c, c * cb, K * x * c * cb, np.zeros_like(x))
            return np.stack([wt * re, wt * im], axis=1)

        func, pref = integrand2, 2.0 * math.pi
    else:
        # dx off the wind axis: the wind azimuth is periodic and even, so a
        # trapezoid rule on [0, pi] converges spectrally; halving the grid
        # gives the error estimate
        def integrand_az(pts):
            x, w = pts[:, 0], pts[:, 1]
            c, wt = frame.weight(x, w)
            xm = float(np.max(x))
            band = K * xm * abs(sb) + partial_wave_count(KR * xm) + 16
            n_phi = 1 << max(4, int(math.ceil(math.log2(band))))
            phi = np.linspace(0.0, math.pi, n_phi + 1)
            wts = np.full(n_phi + 1, math.pi / n_phi)
            wts[[0, -1]] *= 0.5
            half = 2.0 * wts[::2]
            half[[0, -1]] = math.pi / n_phi
            rows = max(1, 65536 // (n_phi + 1))
            out = np.empty((len(x), 2))
            for i in range(0, len(x), rows):
                xs, cs = x[i:i + rows], c[i:i + rows]
                sn = np.sqrt(np.clip(1.0 - cs * cs, 0.0, None))
                cos_a = np.clip(sn[:, None] * np.cos(phi)[None, :] * sb + cs[:, None] * cb, -1.0, 1.0)
                xx = np.broadcast_to(xs[:, None], cos_a.shape)
                re, im = body(xx.ravel(), None, cos_a.ravel(), (K * xx * cos_a).ravel(),
                              np.zeros(cos_a.size))
                re, im = re.reshape(cos_a.shape), im.reshape(cos_a.shape)
                f_re, f_im = re @ wts, im @ wts
                err = np.abs(f_re - re[:, ::2] @ half) + np.abs(f_im - im[:, ::2] @ half)
                ref = math.pi * 4.0 * math.pi * (incoh + coh * coherent_average_table(2.0 * KR, xs))
                inner_rel[0] = max(inner_rel[0], float(np.max(err / ref)))
                out[i:i + rows, 0] = f_re
                out[i:i + rows, 1] = f_im
            return out * wt[:, None]

        func, pref = integrand_az, 2.0

    def chunked(pts):
        return _chunked(func, pts, settings.chunk)

    pref *= number_density(halo, m_dm) * halo.v0
    scale = total_scattering_rate(halo, wind, model, comp, m_dm)
    result = _run_segments(frame, chunked, settings, pref, scale_hint=scale / abs(pref))
    inner_err = inner_rel[0] * scale
    result = replace(result, quadrature_error=result.quadrature_error + inner_err)
    if inner_err > settings.rtol * max(abs(result.F), settings.rtol * scale):
        raise QuadratureError(
            f"angular series not converged (inner error {inner_err:.2e} 1/s)",
            partial=result)
    return result


def decoherence_rate(halo, wind, model, comp, m_dm, dx, settings=DEFAULT_SETTINGS):
    """Dispatch on ``model.mode``."""
    if model.mode == "pointlike":
        return rate_pointlike(halo, wind, model, m_dm, dx, comp=comp, settings=settings)
    return rate_extended(halo, wind, model, comp, m_dm, dx, settings=settings)


def exponent(rate, T):
    """Gamma = F T for a shot of duration ``T`` (s) with the wind frozen."""
    if not T >= 0:
        raise ValueError("exposure time must be >= 0")
    re, im = rate.F.real * T, rate.F.imag * T
    if re < 0:
        if -re <= rate.quadrature_error * T:
            re = 0.0
        else:
            raise QuadratureError(
                f"Re F = {rate.F.real:.3e} 1/s is negative beyond its error bar "
                f"{rate.quadrature_error:.2e}", partial=rate)
    return DecoherenceExponent(re, im)


@dataclass(frozen=True)
class AnisotropyResult:
    ratio: float
    error: float
    parallel: RateResult
    perpendicular: RateResult


def anisotropy_ratio(halo, wind, model, comp, m_dm, length, settings=DEFAULT_SETTINGS):
    """Re F with dx along the wind over Re F with dx perpendicular to it."""
    par = decoherence_rate(halo, wind, model, comp, m_dm, (length, 0.0), settings)
    perp = decoherence_rate(halo, wind, model, comp, m_dm, (length, math.pi / 2), settings)
    ratio = par.re / perp.re
    err = abs(ratio) * math.hypot(par.quadrature_error / par.re, perp.quadrature_error / perp.re)
    return AnisotropyResult(ratio, err, par, perp)


def separation_vector(wind, length, angle):
    """Lab-frame dx (m) of ``length`` at ``angle`` (rad) to the lab velocity.

    The azimuth about the wind is irrelevant for an isotropic halo; the
    perpendicular component is put along wind x y-hat (or x-hat if parallel).
    """
    d = wind.direction
    perp = np.cross(d, [0.0, 1.0, 0.0])
    if np.linalg.norm(perp) < 1e-12:
        perp = np.cross(d, [1.0, 0.0, 0.0])
    perp /= np.linalg.norm(perp)
    return length * (math.cos(angle) * d + math.sin(angle) * perp)

"""Two-path coherence: decoherence exponent -> interferometer observables.

The superposed object is described in the {|L>, |R>} basis by

    rho = 1/2 [[1, gamma], [conj(gamma), 1]],   gamma = exp(-Gamma)

where Gamma is the time-integrated complex decoherence rate.  The real part
of Gamma suppresses the fringes; the imaginary part is a phase.
"""

from dataclasses import dataclass

import numpy as np

#: absolute slack allowed on |gamma| <= 1 (quadrature round-off)
GAMMA_TOL = 1e-9


@dataclass(frozen=True)
class DecoherenceExponent:
    """Complex exponent Gamma stored as (re, im); re >= 0."""

    re: float = 0.0
    im: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.re) or not np.isfinite(self.im):
            raise ValueError(f"non-finite decoherence exponent ({self.re}, {self.im})")
        if self.re < 0:
            raise ValueError(f"decoherence exponent must have re >= 0, got {self.re}")

    def __add__(self, other):
        return DecoherenceExponent(self.re + other.re, self.im + other.im)

    def scaled(self, factor):
        if factor < 0:
            raise ValueError("exposure scale factor must be >= 0")
        return DecoherenceExponent(self.re * factor, self.im * factor)

    @property
    def value(self):
        return complex(self.re, self.im)


def _check_gamma(gamma):
    gamma = complex(gamma)
    if abs(gamma) > 1.0 + GAMMA_TOL:
        raise ValueError(f"|gamma| = {abs(gamma)!r} exceeds 1")
    return gamma


def gamma_from_exponent(exponent):
    """Decoherence factor gamma = exp(-re) * exp(-i im)."""
    if exponent.re < 0:
        raise ValueError(f"decoherence exponent must have re >= 0, got {exponent.re}")
    return complex(np.exp(-exponent.re) * np.exp(-1j * exponent.im))


def dim_port_probability(gamma):
    """Probability of the dim-port outcome |psi_->: (1 - Re gamma) / 2."""
    gamma = _check_gamma(gamma)
    return min(max(0.5 * (1.0 - gamma.real), 0.0), 1.0)


def bright_port_probability(gamma):
    return 1.0 - dim_port_probability(gamma)


def visibility(gamma):
    """Fringe visibility |gamma|, clipped into [0, 1]."""
    return min(abs(_check_gamma(gamma)), 1.0)


@dataclass(frozen=True)
class TwoPathState:
    gamma: complex = 1.0 + 0.0j

    def __post_init__(self):
        object.__setattr__(self, "gamma", _check_gamma(self.gamma))

    @classmethod
    def from_exponent(cls, exponent):
        return cls(gamma_from_exponent(exponent))

    def density_matrix(self):
        g = self.gamma
        return 0.5 * np.array([[1.0, g], [np.conj(g), 1.0]], dtype=complex)

    def eigenvalues(self):
        """Analytic eigenvalues (1 -/+ |gamma|)/2 in ascending order."""
        a = abs(self.gamma)
        return np.array([0.5 * (1.0 - a), 0.5 * (1.0 + a)])

    @property
    def visibility(self):
        return visibility(self.gamma)

    @property
    def p_dim(self):
        return dim_port_probability(self.gamma)

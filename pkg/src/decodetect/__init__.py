"""Decoherence detection of feeble particles: rates, exclusion scans and shot simulation."""

from importlib import metadata as _md

try:
    __version__ = _md.version("artifact")
except _md.PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .core import DecoherenceExponent, TwoPathState, dim_port_probability, gamma_from_exponent, visibility
from .decoherence import MODEL_TAG, QuadratureError, RateResult, decoherence_rate, exponent
from .halo import HaloModel, static_wind, wind_velocity
from .scattering import ScatteringModel, TargetComposition
from .targets import TargetSpec, builtin_targets, get_preset

"""Strict TOML experiment configuration.

Grammar: a TOML document with at most these tables, every key optional.

    [halo]        rho_gev_cm3, v0_km_s, v_esc_km_s, v_sun_km_s, orbit_speed_km_s,
                  orbit_inclination_deg, peak_day, day   (day absent -> solar-only wind)
    [target]      preset, name, material, total_mass_amu, nucleus_A, radius_m,
                  density_kg_m3, separation_m, orientation, exposure_s, altitude_m,
                  shots, mode, coherent, stated
    [scattering]  sigma_n_cm2, m_dm_ev
    [shielding]   n_crit, n_crit_provenance, mass_exponent, extra_column_g_cm2,
                  mean_nucleus_A, atmosphere_csv
    [scan]        mass_min_ev, mass_max_ev, points_per_decade, per_shot, sigma_ref_cm2
    [montecarlo]  seed, n_shots, start_day, campaign_days, gamma_background, samples
    [quadrature]  rtol, max_evaluations, max_partial_waves

Unknown tables or keys are errors.  ``resolve`` fills every default and
expands the target preset so that the resolved form re-loads to the same
experiment.
"""

import copy
import math
import re

import tomli
import tomli_w

from .decoherence import QuadratureSettings
from .halo import HaloModel, WindState, static_wind, wind_velocity
from .shielding import (
    DEFAULT_N_CRIT,
    N_CRIT_PROVENANCE,
    ShieldCriterion,
    default_atmosphere,
    read_atmosphere_csv,
)
from .targets import load_presets, spec_from_entry, spec_to_entry

DEFAULT_PRESET = "OTIMA-6"

_NUM = (int, float)
SCHEMA = {
    "halo": {
        "rho_gev_cm3": (_NUM, 0.3),
        "v0_km_s": (_NUM, 220.0),
        "v_esc_km_s": (_NUM, 550.0),
        "v_sun_km_s": (_NUM, 230.0),
        "orbit_speed_km_s": (_NUM, 29.8),
        "orbit_inclination_deg": (_NUM, 60.0),
        "peak_day": (_NUM, 152.5),
        "day": (_NUM, None),
    },
    "target": {
        "preset": (str, None),
        "name": (str, None),
        "material": (str, None),
        "total_mass_amu": (_NUM, None),
        "nucleus_A": (_NUM, None),
        "radius_m": (_NUM, None),
        "density_kg_m3": (_NUM, None),
        "separation_m": (_NUM, None),
        "orientation": ((str, int, float), None),
        "exposure_s": (_NUM, None),
        "altitude_m": (_NUM, None),
        "shots": (int, None),
        "mode": (str, None),
        "coherent": (bool, None),
        "stated": (list, None),
    },
    "scattering": {
        "sigma_n_cm2": (_NUM, 1e-30),
        "m_dm_ev": (_NUM, 1e4),
    },
    "shielding": {
        "n_crit": (_NUM, DEFAULT_N_CRIT),
        "n_crit_provenance": (str, N_CRIT_PROVENANCE),
        "mass_exponent": (_NUM, 0.0),
        "extra_column_g_cm2": (_NUM, 0.0),
        "mean_nucleus_A": (_NUM, 14.5),
        "atmosphere_csv": (str, None),
    },
    "scan": {
        "mass_min_ev": (_NUM, 1.0),
        "mass_max_ev": (_NUM, 1.0e6),
        "points_per_decade": (int, 33),
        "per_shot": (bool, False),
        "sigma_ref_cm2": (_NUM, 1e-30),
    },
    "montecarlo": {
        "seed": (int, 0),
        "n_shots": (int, 1000),
        "start_day": (_NUM, 0.0),
        "campaign_days": (_NUM, 365.25),
        "gamma_background": (_NUM, 0.0),
        "samples": (int, 1_000_000),
    },
    "quadrature": {
        "rtol": (_NUM, 1e-4),
        "max_evaluations": (int, 100_000_000),
        "max_partial_waves": (int, 20000),
    },
}


class ConfigError(ValueError):
    """Invalid configuration; the message names the table, key and line if known."""


def _line_of(text, table, key=None):
    if text is None:
        return None
    current = None
    for i, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", s)
        if m:
            current = m.group(1)
            if key is None and current == table:
                return i
            continue
        if key is not None and current == table and re.match(rf"^{re.escape(key)}\s*=", s):
            return i
    return None


def _where(text, table, key=None):
    line = _line_of(text, table, key)
    loc = f"[{table}]" + (f".{key}" if key else "")
    return f"line {line}: {loc}" if line else loc


def validate(doc, text=None):
    """Type-check ``doc`` against the schema; returns a deep copy."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a table")
    out = {}
    for table, body in doc.items():
        if table not in SCHEMA:
            raise ConfigError(f"{_where(text, table)}: unknown table (expected one of "
                              f"{', '.join(SCHEMA)})")
        if not isinstance(body, dict):
            raise ConfigError(f"{_where(text, table)}: must be a table")
        out[table] = {}
        for key, value in body.items():
            if key not in SCHEMA[table]:
                raise ConfigError(f"{_where(text, table, key)}: unknown key")
            types, _ = SCHEMA[table][key]
            ok = isinstance(value, types) and not (isinstance(value, bool) and bool not in
                                                    (types if isinstance(types, tuple) else (types,)))
            if not ok:
                raise ConfigError(f"{_where(text, table, key)}: wrong type "
                                  f"{type(value).__name__}")
            if isinstance(value, float) and not math.isfinite(value):
                raise ConfigError(f"{_where(text, table, key)}: must be finite")
            out[table][key] = copy.deepcopy(value)
    return out


def loads(text):
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax: {exc}") from None
    doc = validate(doc, text)
    return resolve(doc, text)


def load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not UTF-8") from None
    return loads(text)


def dumps(resolved):
    return tomli_w.dumps(_strip_none(resolved))


def _strip_none(d):
    return {t: {k: v for k, v in body.items() if v is not None} for t, body in d.items()}


def resolve(doc, text=None):
    """Fill defaults, expand the target preset and check every value physically."""
    doc = validate(doc, text)
    out = {}
    for table, keys in SCHEMA.items():
        if table == "target":
            continue
        body = doc.get(table, {})
        out[table] = {k: body.get(k, default) for k, (_, default) in keys.items()}
    out["target"] = _resolve_target(doc.get("target", {}), text)
    out = {t: out[t] for t in SCHEMA}
    build(out, text)
    return _strip_none(out)


def _resolve_target(body, text):
    body = dict(body)
    preset = body.pop("preset", None)
    name = body.pop("name", None)
    if preset is None and "nucleus_A" not in body:
        preset = DEFAULT_PRESET
    entry = {}
    if preset is not None:
        presets = load_presets()
        if preset not in presets:
            raise ConfigError(f"{_where(text, 'target', 'preset')}: unknown preset {preset!r} "
                              f"(choose from {', '.join(sorted(presets))})")
        entry = dict(presets[preset])
        # explicit size overrides replace the preset's way of fixing it
        if "radius_m" in body and "total_mass_amu" not in body:
            entry.pop("total_mass_amu", None)
        if "total_mass_amu" in body and "radius_m" not in body:
            entry.pop("radius_m", None)
    entry.update(body)
    try:
        spec = spec_from_entry(name or preset or "custom", entry)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"{_where(text, 'target')}: {exc}") from None
    resolved = spec_to_entry(spec)
    resolved["name"] = spec.name
    return resolved


class Experiment:
    """Physics objects built from a resolved config."""

    def __init__(self, resolved):
        self.config = resolved
        h, sh, q = resolved["halo"], resolved["shielding"], resolved["quadrature"]
        self.halo = HaloModel.from_boundary_units(
            h["rho_gev_cm3"], h["v0_km_s"], h["v_esc_km_s"], h["v_sun_km_s"],
            h["orbit_speed_km_s"], h["orbit_inclination_deg"], h["peak_day"])
        day = h.get("day")
        self.wind = static_wind(self.halo) if day is None else wind_velocity(self.halo, day)
        entry = {k: v for k, v in resolved["target"].items() if k != "name"}
        self.target = spec_from_entry(resolved["target"]["name"], entry)
        if sh.get("atmosphere_csv"):
            self.atmosphere = read_atmosphere_csv(sh["atmosphere_csv"], sh["mean_nucleus_A"])
        else:
            self.atmosphere = default_atmosphere(sh["mean_nucleus_A"])
        self.criterion = ShieldCriterion(sh["n_crit"], sh["mass_exponent"],
                                         sh["extra_column_g_cm2"])
        self.settings = QuadratureSettings(rtol=q["rtol"], max_evaluations=q["max_evaluations"],
                                           max_partial_waves=q["max_partial_waves"])


_FIELD_HINTS = [
    ("halo", "rho_gev_cm3"), ("halo", "v0_km_s"), ("halo", "v_esc_km_s"),
    ("halo", "v_sun_km_s"), ("halo", "orbit_speed_km_s"), ("shielding", "n_crit"),
    ("shielding", "mass_exponent"), ("shielding", "extra_column_g_cm2"),
    ("shielding", "mean_nucleus_A"), ("shielding", "atmosphere_csv"), ("quadrature", "rtol"),
    ("quadrature", "max_evaluations"),
]


def build(resolved, text=None):
    """Experiment from a resolved config; physical range errors become ConfigError."""
    checks = [
        ("scattering", "sigma_n_cm2", lambda v: v >= 0),
        ("scattering", "m_dm_ev", lambda v: v > 0),
        ("scan", "mass_min_ev", lambda v: 1.0 <= v <= 1e6),
        ("scan", "mass_max_ev", lambda v: 1.0 <= v <= 1e6),
        ("scan", "points_per_decade", lambda v: v >= 1),
        ("scan", "sigma_ref_cm2", lambda v: v > 0),
        ("montecarlo", "seed", lambda v: 0 <= v < 2**64),
        ("montecarlo", "n_shots", lambda v: v >= 1),
        ("montecarlo", "campaign_days", lambda v: v > 0),
        ("montecarlo", "gamma_background", lambda v: v >= 0),
        ("montecarlo", "samples", lambda v: v >= 1000),
    ]
    for table, key, ok in checks:
        if not ok(resolved[table][key]):
            raise ConfigError(f"{_where(text, table, key)}: value {resolved[table][key]!r} "
                              "out of range")
    if resolved["scan"]["mass_min_ev"] > resolved["scan"]["mass_max_ev"]:
        raise ConfigError(f"{_where(text, 'scan', 'mass_min_ev')}: exceeds mass_max_ev")
    try:
        return Experiment(resolved)
    except (ValueError, OSError) as exc:
        msg = str(exc)
        for table, key in _FIELD_HINTS:
            if key.split("_")[0] in msg or key in msg:
                raise ConfigError(f"{_where(text, table, key)}: {msg}") from None
        raise ConfigError(msg) from None


def with_overrides(resolved, **overrides):
    """Copy of ``resolved`` with ``table__key=value`` overrides applied and re-checked."""
    out = copy.deepcopy(resolved)
    for name, value in overrides.items():
        table, key = name.split("__")
        out[table][key] = value
    return resolve(out)

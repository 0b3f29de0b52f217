"""Superposed-object presets and the size/exposure scaling rules."""

import math
from dataclasses import asdict, dataclass, field, replace
from importlib import resources

import tomli

from . import constants as const
from .scattering import ScatteringModel, TargetComposition

ORIENTATIONS = {"parallel": 0.0, "perpendicular": 90.0, "antiparallel": 180.0}
_FIELDS = ["material", "total_mass_amu", "nucleus_A", "radius_m", "separation_m",
           "orientation", "exposure_s", "altitude_m", "shots", "mode", "coherent"]


@dataclass(frozen=True)
class TargetSpec:
    """A superposed object and its interferometer parameters.

    ``orientation_deg`` is the angle between the separation vector and the
    lab velocity through the halo; 0 points the separation into the wind.
    """

    name: str
    total_mass: float           # amu
    nucleus_A: float
    radius: float               # m
    separation: float           # m
    orientation_deg: float = 0.0
    exposure: float = 1.0       # s
    altitude: float = 0.0       # m
    shots: int = 1
    material: str = ""
    mode: str = "extended"
    coherent: bool = True
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.total_mass > 0 or not self.nucleus_A >= 1:
            raise ValueError(f"{self.name}: total_mass must be > 0 and nucleus_A >= 1")
        if self.total_mass < self.nucleus_A * 0.99:
            raise ValueError(f"{self.name}: total_mass below one nucleus")
        if self.radius < 0:
            raise ValueError(f"{self.name}: radius must be >= 0")
        if not self.separation > 0 or not self.exposure > 0 or self.shots < 1:
            raise ValueError(f"{self.name}: need separation > 0, exposure > 0, shots >= 1")
        if self.altitude < 0:
            raise ValueError(f"{self.name}: altitude must be >= 0")
        if self.mode not in ("pointlike", "extended"):
            raise ValueError(f"{self.name}: unknown mode {self.mode!r}")

    @property
    def nucleus_count(self):
        return self.total_mass / self.nucleus_A

    @property
    def mass_kg(self):
        return const.amu_to_kg(self.total_mass)

    @property
    def dx(self):
        return (self.separation, math.radians(self.orientation_deg))

    def composition(self):
        return TargetComposition(self.nucleus_A, self.nucleus_count, self.radius)

    def scattering_model(self, sigma_n):
        return ScatteringModel(sigma_n, self.mode, self.coherent)

    def to_dict(self):
        d = asdict(self)
        d["provenance"] = dict(self.provenance)
        return d


def radius_from_density(mass_amu, density):
    """Radius (m) of a homogeneous sphere of ``mass_amu`` at ``density`` kg/m^3."""
    volume = const.amu_to_kg(mass_amu) / density
    return (3.0 * volume / (4.0 * math.pi)) ** (1.0 / 3.0)


def mass_from_radius(radius, density):
    return const.kg_to_amu(4.0 / 3.0 * math.pi * radius**3 * density)


def parse_orientation(value):
    """'parallel' / 'perpendicular' / 'antiparallel' or an angle in degrees -> degrees."""
    if isinstance(value, str):
        try:
            return ORIENTATIONS[value]
        except KeyError:
            raise ValueError(f"unknown orientation {value!r}") from None
    return float(value)


def time_domain_exposure(base_T, base_mass, mass):
    """Exposure of a time-domain interferometer, proportional to the object mass."""
    if not (base_T > 0 and base_mass > 0 and mass > 0):
        raise ValueError("exposure scaling needs positive inputs")
    return base_T * (mass / base_mass)


def scale_target(spec, factor, density=None):
    """``spec`` with its mass multiplied by ``factor``.

    Radius grows as factor^(1/3) (fixed density) and the exposure follows the
    time-domain rule.
    """
    if not factor > 0:
        raise ValueError("scale factor must be > 0")
    mass = spec.total_mass * factor
    radius = spec.radius * factor ** (1.0 / 3.0)
    if density is not None:
        radius = radius_from_density(mass, density)
    return replace(spec, total_mass=mass, radius=radius,
                   exposure=time_domain_exposure(spec.exposure, spec.total_mass, mass))


def spec_from_entry(name, entry):
    """Build a TargetSpec from a preset/config table (boundary units)."""
    entry = dict(entry)
    stated = set(entry.pop("stated", []))
    density = entry.pop("density_kg_m3", None)
    A = float(entry.pop("nucleus_A"))
    radius = entry.pop("radius_m", None)
    mass = entry.pop("total_mass_amu", None)
    if mass is None and radius is None:
        raise ValueError(f"{name}: give total_mass_amu or radius_m")
    if mass is None:
        if density is None:
            raise ValueError(f"{name}: radius_m without total_mass_amu needs density_kg_m3")
        mass = mass_from_radius(radius, density)
    if radius is None:
        radius = radius_from_density(mass, density) if density else 0.0
    prov = {k: ("stated" if k in stated else "artifact-default") for k in _FIELDS}
    spec = TargetSpec(
        name=name,
        total_mass=float(mass),
        nucleus_A=A,
        radius=float(radius),
        separation=float(entry.pop("separation_m")),
        orientation_deg=parse_orientation(entry.pop("orientation", "parallel")),
        exposure=float(entry.pop("exposure_s")),
        altitude=float(entry.pop("altitude_m", 0.0)),
        shots=int(entry.pop("shots", 1)),
        material=str(entry.pop("material", "")),
        mode=str(entry.pop("mode", "extended")),
        coherent=bool(entry.pop("coherent", True)),
        provenance=prov,
    )
    if entry:
        raise ValueError(f"{name}: unknown target keys {sorted(entry)}")
    return spec


def spec_to_entry(spec):
    """Inverse of ``spec_from_entry`` (lossless for every field)."""
    return {
        "material": spec.material,
        "total_mass_amu": spec.total_mass,
        "nucleus_A": spec.nucleus_A,
        "radius_m": spec.radius,
        "separation_m": spec.separation,
        "orientation": spec.orientation_deg,
        "exposure_s": spec.exposure,
        "altitude_m": spec.altitude,
        "shots": spec.shots,
        "mode": spec.mode,
        "coherent": spec.coherent,
        "stated": sorted(k for k, v in spec.provenance.items() if v == "stated"),
    }


def load_presets():
    text = resources.files(__package__).joinpath("data/targets.toml").read_text("utf-8")
    return tomli.loads(text)


def builtin_targets():
    """The bundled presets: OTIMA-6, Nanosphere, AGIS."""
    return [spec_from_entry(name, entry) for name, entry in load_presets().items()]


def get_preset(name):
    presets = load_presets()
    if name not in presets:
        raise KeyError(f"unknown target preset {name!r}; choose from {sorted(presets)}")
    return spec_from_entry(name, presets[name])

import pytest

from decodetect import config as cfg
from decodetect.shielding import DEFAULT_N_CRIT
from decodetect.targets import get_preset


def test_defaults_resolve_and_round_trip():
    r = cfg.resolve({})
    assert r["target"]["name"] == "OTIMA-6"
    assert r["shielding"]["n_crit"] == DEFAULT_N_CRIT
    assert "calibrated" in r["shielding"]["n_crit_provenance"]
    assert cfg.loads(cfg.dumps(r)) == r
    assert "day" not in r["halo"]


@pytest.mark.parametrize("name", ["OTIMA-6", "Nanosphere", "AGIS"])
def test_presets_round_trip_through_config(name):
    r = cfg.loads(f'[target]\npreset = "{name}"\n')
    again = cfg.loads(cfg.dumps(r))
    assert again == r
    assert cfg.build(again).target == get_preset(name)
    assert cfg.build(again).target.provenance == get_preset(name).provenance


def test_overrides_and_experiment():
    r = cfg.loads('[target]\npreset = "Nanosphere"\nradius_m = 5e-8\nexposure_s = 2.0\n'
                  '[halo]\nday = 152.5\n[quadrature]\nrtol = 1e-3\n')
    e = cfg.build(r)
    assert e.target.radius == 5e-8 and e.target.exposure == 2.0
    assert e.target.total_mass > get_preset("Nanosphere").total_mass
    assert e.wind.epoch == 152.5 and e.settings.rtol == 1e-3
    r2 = cfg.with_overrides(r, scattering__m_dm_ev=50.0)
    assert r2["scattering"]["m_dm_ev"] == 50.0 and r["scattering"]["m_dm_ev"] == 1e4


@pytest.mark.parametrize("text,pattern", [
    ("[halo]\nv0_km_s = 220\nv0_kms = 1\n", r"line 3: \[halo\]\.v0_kms: unknown key"),
    ("[halos]\nv0_km_s = 220\n", r"line 1: \[halos\]: unknown table"),
    ("[scan]\npoints_per_decade = true\n", r"line 2: \[scan\]\.points_per_decade: wrong type"),
    ("[scan]\npoints_per_decade = 3.5\n", r"points_per_decade: wrong type"),
    ("[scattering]\nm_dm_ev = -1\n", r"line 2: \[scattering\]\.m_dm_ev: value -1 out of range"),
    ("[scan]\nmass_max_ev = 1e7\n", r"mass_max_ev"),
    ("[halo]\nv0_km_s = 900\n", r"\[halo\]\.v0_km_s"),
    ("[target]\npreset = \"LIGO\"\n", r"unknown preset"),
    ("[target]\npreset = \"AGIS\"\ncolour = 1\n", r"line 3: \[target\]\.colour"),
    ("[target]\npreset = \"AGIS\"\nseparation_m = 0\n", r"\[target\]"),
    ("[montecarlo]\nseed = -3\n", r"seed"),
    ("[halo\nv0 = 1\n", r"TOML syntax"),
])
def test_errors_are_field_precise(text, pattern):
    with pytest.raises(cfg.ConfigError, match=pattern):
        cfg.loads(text)


def test_missing_file(tmp_path):
    with pytest.raises(cfg.ConfigError):
        cfg.load(tmp_path / "nope.toml")


def test_custom_atmosphere(tmp_path):
    p = tmp_path / "atm.csv"
    p.write_text("altitude_m,column_g_cm2\n0,1000\n1000,10\n")
    e = cfg.build(cfg.loads(f'[shielding]\natmosphere_csv = "{p}"\n'))
    assert e.atmosphere.columns == (1000.0, 10.0)

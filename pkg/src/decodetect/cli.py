"""decodetect command line: rate, scan, campaign, graviton, shield.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from . import constants as const
from . import config as cfgmod
from .core import dim_port_probability, gamma_from_exponent, visibility
from .decoherence import MODEL_TAG, PHASE_CONVENTION, QuadratureError, decoherence_rate, exponent
from .gravwave import (
    FEASIBILITY_NOTE,
    PREFACTOR,
    GravSuperposition,
    grav_exponent,
    planck_crossover_mass,
)
from .montecarlo import simulate_campaign, write_campaign
from .scan import exclusion_scan, mass_grid
from .shielding import column_density, max_visible_sigma
from .targets import parse_orientation

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _load(args, **overrides):
    resolved = cfgmod.load(args.config) if args.config else cfgmod.resolve({})
    extra = {k: v for k, v in overrides.items() if v is not None}
    if getattr(args, "tolerance", None) is not None:
        extra["quadrature__rtol"] = args.tolerance
    if extra:
        resolved = cfgmod.with_overrides(resolved, **extra)
    return resolved, cfgmod.build(resolved)


def _header(resolved):
    return {"version": __version__, "model": MODEL_TAG, "phase_convention": PHASE_CONVENTION,
            "config": resolved}


def cmd_rate(args, out):
    overrides = {"scattering__m_dm_ev": args.mass_ev, "scattering__sigma_n_cm2": args.sigma_cm2}
    if args.orientation is not None:
        try:
            overrides["target__orientation"] = parse_orientation(_maybe_float(args.orientation))
        except ValueError as exc:
            raise cfgmod.ConfigError(f"--orientation: {exc}") from None
    resolved, exp = _load(args, **overrides)
    sc = resolved["scattering"]
    model = exp.target.scattering_model(const.cm2_to_m2(sc["sigma_n_cm2"]))
    m_dm = const.ev_to_kg(sc["m_dm_ev"])
    dx = exp.target.dx
    if args.separation_m is not None:
        # evaluation-only override; 0 is allowed here (gamma = 1)
        if not args.separation_m >= 0:
            raise cfgmod.ConfigError("--separation-m must be >= 0")
        dx = (args.separation_m, dx[1])
    rate = decoherence_rate(exp.halo, exp.wind, model, exp.target.composition(), m_dm,
                            dx, exp.settings)
    T = exp.target.exposure * exp.target.shots
    gam = exponent(rate, T)
    g = gamma_from_exponent(gam)
    rows = {
        "target": exp.target.name,
        "m_dm_eV": sc["m_dm_ev"],
        "sigma_n_cm2": sc["sigma_n_cm2"],
        "orientation_deg": exp.target.orientation_deg,
        "separation_m": dx[0],
        "exposure_s": T,
        "F_re_per_s": rate.re,
        "F_im_per_s": rate.im,
        "F_error_per_s": rate.quadrature_error,
        "Gamma_re": gam.re,
        "Gamma_im": gam.im,
        "visibility": visibility(g),
        "p_dim": dim_port_probability(g),
    }
    for k, v in rows.items():
        out.write(f"{k:16s} {v:.6g}\n" if isinstance(v, float) else f"{k:16s} {v}\n")
    if args.out:
        Path(args.out).write_text(json.dumps({**_header(resolved), "result": rows},
                                             indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def _maybe_float(s):
    try:
        return float(s)
    except ValueError:
        return s


def cmd_scan(args, out):
    resolved, exp = _load(args)
    s = resolved["scan"]
    masses = mass_grid(s["mass_min_ev"], s["mass_max_ev"], s["points_per_decade"])
    log = (lambda line: out.write(line + "\n")) if args.threads <= 1 else None
    grid = exclusion_scan(exp.target, exp.halo, exp.wind, exp.atmosphere, exp.criterion, masses,
                          per_shot=s["per_shot"], sigma_ref_cm2=s["sigma_ref_cm2"],
                          settings=exp.settings, workers=args.threads, log=log)
    grid.metadata.update(_header(resolved))
    csv_path = Path(args.out or "scan.csv")
    meta = grid.write(csv_path, overlay=args.overlay)
    n_fail = sum(1 for f in grid.flags if f.startswith("quadrature"))
    out.write(f"wrote {csv_path} and {meta.name} ({len(masses)} masses, {n_fail} failures)\n")
    return EXIT_NUMERIC if n_fail == len(masses) else EXIT_OK


def cmd_campaign(args, out):
    resolved, exp = _load(args, montecarlo__seed=args.seed)
    sc, mc = resolved["scattering"], resolved["montecarlo"]
    res = simulate_campaign(exp.target, exp.halo, exp.target.scattering_model(0.0),
                            const.ev_to_kg(sc["m_dm_ev"]), const.cm2_to_m2(sc["sigma_n_cm2"]),
                            mc["n_shots"], mc["start_day"], mc["seed"],
                            campaign_days=mc["campaign_days"],
                            gamma_background=mc["gamma_background"], settings=exp.settings)
    csv_path = Path(args.out or "campaign.csv")
    json_path = csv_path.with_name(csv_path.name + ".meta.json")
    res.metadata.update({"model": MODEL_TAG})
    write_campaign(res, csv_path, json_path, config=resolved, version=__version__)
    summ = res.summary()
    out.write(f"dim fraction {summ['dim_fraction']:.6g} "
              f"(99% CI {summ['dim_fraction_ci99'][0]:.4g}-{summ['dim_fraction_ci99'][1]:.4g}) "
              f"over {summ['n_shots']} shots; wrote {csv_path}\n")
    return EXIT_OK


def cmd_graviton(args, out):
    if (args.mass_amu is None) == (args.mass_ug is None):
        raise cfgmod.ConfigError("graviton: give exactly one of --mass-amu, --mass-ug")
    mass = (const.amu_to_kg(args.mass_amu) if args.mass_amu is not None
            else args.mass_ug * const.MICROGRAM)
    try:
        s = GravSuperposition(mass, args.beta)
    except ValueError as exc:
        raise cfgmod.ConfigError(f"graviton: {exc}") from None
    gam = grav_exponent(s)
    g = gamma_from_exponent(gam)
    out.write(f"{'mass_kg':16s} {mass:.6g}\n")
    out.write(f"{'beta':16s} {args.beta:.6g}\n")
    out.write(f"{'Gamma_re':16s} {gam.re:.6g}\n")
    out.write(f"{'visibility':16s} {visibility(g):.6g}\n")
    if args.beta > 0:
        m_x = planck_crossover_mass(args.beta, args.target_exponent)
        out.write(f"{'crossover_kg':16s} {m_x:.6g}\n")
        out.write(f"{'crossover_amu':16s} {const.kg_to_amu(m_x):.6g}\n")
    out.write(f"{'prefactor':16s} {PREFACTOR:g}\n")
    out.write(f"note: {FEASIBILITY_NOTE}\n")
    return EXIT_OK


def cmd_shield(args, out):
    resolved, exp = _load(args)
    alt = exp.target.altitude if args.altitude is None else args.altitude
    m_ev = resolved["scattering"]["m_dm_ev"] if args.mass_ev is None else args.mass_ev
    if not alt >= 0 or not m_ev > 0:
        raise cfgmod.ConfigError("shield: need altitude >= 0 and mass > 0")
    sig = max_visible_sigma(exp.atmosphere, exp.criterion, const.ev_to_kg(m_ev), alt)
    out.write(f"{'altitude_m':16s} {alt:.6g}\n")
    out.write(f"{'column_g_cm2':16s} {column_density(exp.atmosphere, alt):.6g}\n")
    out.write(f"{'m_dm_eV':16s} {m_ev:.6g}\n")
    out.write(f"{'sigma_max_cm2':16s} {sig:.6g}\n")
    out.write(f"{'log10_sigma':16s} {math.log10(sig):.4f}\n")
    out.write(f"n_crit {resolved['shielding']['n_crit']!r} "
              f"({resolved['shielding']['n_crit_provenance']})\n")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="decodetect", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out=True):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--tolerance", type=float, metavar="REAL", help="quadrature rtol")
        if out:
            sp.add_argument("--out", metavar="PATH")

    r = sub.add_parser("rate", help="decoherence rate and observables for one configuration")
    common(r)
    r.add_argument("--mass-ev", type=float)
    r.add_argument("--sigma-cm2", type=float)
    r.add_argument("--orientation", help="parallel, perpendicular, antiparallel or degrees")
    r.add_argument("--separation-m", type=float, help="override |dx| for this evaluation")
    r.set_defaults(func=cmd_rate)

    s = sub.add_parser("scan", help="exclusion band over the configured mass grid")
    common(s)
    s.add_argument("--threads", type=int, default=1, metavar="N")
    s.add_argument("--overlay", metavar="PATH", help="external curve CSV copied alongside")
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("campaign", help="shot-by-shot campaign simulation")
    common(c)
    c.add_argument("--seed", type=int, metavar="U64")
    c.add_argument("--threads", type=int, default=1, metavar="N",
                   help="accepted for interface symmetry; results do not depend on it")
    c.set_defaults(func=cmd_campaign)

    g = sub.add_parser("graviton", help="gravitational-bremsstrahlung decoherence")
    g.add_argument("--mass-amu", type=float)
    g.add_argument("--mass-ug", type=float)
    g.add_argument("--beta", type=float, required=True)
    g.add_argument("--target-exponent", type=float, default=1.0)
    g.set_defaults(func=cmd_graviton)

    h = sub.add_parser("shield", help="largest cross-section that survives the overburden")
    common(h, out=False)
    h.add_argument("--altitude", type=float, help="m; default: target altitude")
    h.add_argument("--mass-ev", type=float)
    h.set_defaults(func=cmd_shield)
    return p


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", 1) < 1:
            raise cfgmod.ConfigError("--threads must be >= 1")
        return args.func(args, out)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

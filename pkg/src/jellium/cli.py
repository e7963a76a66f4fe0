"""Command line entry point: sample | cdf | verify | kernel-diff | plot."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io, plotting
from .dpp import exact_extremal_cdf, finite_kernel, rescaled_kernel, sample_jellium
from .limits import (
    bergman_kernel_eval,
    bulk_limit_kernel,
    bulk_max_cdf,
    bulk_min_cdf,
    max_modulus_cdf_outside,
    min_modulus_cdf_disk,
    sample_bergman_disk,
    bergman_truncation,
)
from .measures import builtin_measure, measure_from_dict, potential
from .polynomials import CoefficientLaw, find_roots, sample_polynomial, sample_weyl
from .scenarios import DEFAULT_SEED, SCENARIOS, run_scenario
from .stats import STATISTICS, Model, kernel_grid, kernel_sup_diff, extremal_campaign

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config helpers

def _parse_params(items):
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"measure parameter {item!r} is not of the form key=value")
        out[key.strip()] = float(val)
    return out


def _measure(args):
    spec = args.measure
    if spec is None:
        raise ConfigError("a background measure is required (--measure)")
    if isinstance(spec, dict):
        return measure_from_dict(spec)
    text = str(spec)
    if text.lstrip().startswith("{"):
        return measure_from_dict(json.loads(text))
    if text.endswith(".json") and Path(text).exists():
        return measure_from_dict(io.read_json(text))
    return builtin_measure(text, **_parse_params(args.measure_param))


def _measure_description(args):
    m = _measure(args)
    return m, m.to_dict()


def _law(args):
    law = args.law or "complex_gaussian"
    if isinstance(law, dict):
        return CoefficientLaw.from_dict(law)
    if str(law).lstrip().startswith("{"):
        return CoefficientLaw.from_dict(json.loads(law))
    return CoefficientLaw(str(law))


def _apply_config(args, parser):
    """Fill options left unset on the command line from the TOML file."""
    if not getattr(args, "config", None):
        return args
    with open(args.config, "rb") as fh:
        cfg = tomllib.load(fh)
    section = cfg.get(args.command, cfg.get(args.command.replace("-", "_"), {}))
    shared = {k: v for k, v in cfg.items() if not isinstance(v, dict) or k in ("measure", "law")}
    for key, val in shared.items():
        dest = key.replace("-", "_")
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, val)
    for key, val in section.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise ConfigError(f"unknown configuration key {key!r} for {args.command}")
        if getattr(args, dest) is None:
            setattr(args, dest, val)
    return args


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("--seed is mandatory for sampling")
    return int(args.seed)


def _positive_int(value, name):
    if value is None or int(value) < 1:
        raise ConfigError(f"{name} must be an integer >= 1")
    return int(value)


# ---------------------------------------------------------------- subcommands

def cmd_sample(args):
    seed = _require_seed(args)
    model = args.model or "jellium"
    n = _positive_int(args.n, "n")
    out = Path(args.out or "points.csv")
    meta = {"command": "sample", "model": model, "n": n, "seed": seed}
    if args.replicas is not None or args.statistic is not None:
        replicas = _positive_int(args.replicas, "replicas")
        statistic = args.statistic or "max_mod"
        if model == "weyl":
            mdl = Model("weyl", n, law=_law(args))
        else:
            m, desc = _measure_description(args)
            meta["measure"] = desc
            mdl = Model(model, n, m, _law(args))
        if model != "jellium":
            meta["law"] = mdl.law.to_dict()
        ecdf = extremal_campaign(mdl, statistic, replicas, seed, threads=args.threads)
        io.write_columns_csv(out, ["replica", "value"], [np.arange(replicas), ecdf.raw])
        meta.update({"replicas": replicas, "statistic": statistic})
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        if model == "jellium":
            m, desc = _measure_description(args)
            pts = sample_jellium(m, n, rng).points
            meta["measure"] = desc
        elif model in ("poly_zeros", "weyl"):
            law = _law(args)
            if model == "weyl":
                poly = sample_weyl(n, law, rng)
            else:
                m, desc = _measure_description(args)
                meta["measure"] = desc
                poly = sample_polynomial(m, n, law, rng)
            roots = find_roots(poly)
            pts = roots.roots
            meta["law"] = law.to_dict()
            meta["residual"] = {"backward_error": roots.backward_error, "converged": roots.converged,
                                "sweeps": roots.sweeps}
        elif model == "bergman_disk":
            rho = float(args.radius if args.radius is not None else 0.7)
            K = bergman_truncation(rho, 6.0)
            pts = sample_bergman_disk(rng, K, rho).points
            meta.update({"window_radius": rho, "truncation": K})
        else:
            raise ConfigError(f"unknown model {model!r}")
        io.write_points_csv(out, pts)
        meta["count"] = int(len(pts))
    io.write_json(args.meta or str(out.with_suffix(".json")), meta)
    return 0


CDF_KINDS = ("bergman_max_outside", "bergman_min_disk", "bulk_max", "bulk_min", "exact_max", "exact_min")


def _cdf_function(args):
    kind = args.kind
    R = float(args.R if args.R is not None else 1.0)
    alpha = float(args.alpha if args.alpha is not None else 2.0)
    lam = float(args.lam if args.lam is not None else 1.0)
    if kind == "bergman_max_outside":
        return lambda t: max_modulus_cdf_outside(R, t)
    if kind == "bergman_min_disk":
        return lambda t: min_modulus_cdf_disk(R, t)
    if kind == "bulk_max":
        return lambda t: bulk_max_cdf(alpha, lam, t)
    if kind == "bulk_min":
        return lambda t: bulk_min_cdf(alpha, lam, t)
    if kind in ("exact_max", "exact_min"):
        pot = potential(_measure(args))
        n = _positive_int(args.n, "n")
        return lambda t: exact_extremal_cdf(pot, n, t, kind.split("_")[1])
    raise ConfigError(f"unknown CDF {kind!r}; choose from {', '.join(CDF_KINDS)}")


def cmd_cdf(args):
    if args.t is not None:
        t = np.array([float(x) for x in str(args.t).split(",")])
    else:
        if args.t_min is None or args.t_max is None:
            raise ConfigError("give --t or both --t-min and --t-max")
        t = np.linspace(float(args.t_min), float(args.t_max), int(args.points or 101))
    F = np.asarray(_cdf_function(args)(t), dtype=float)
    io.write_cdf_csv(args.out or "cdf.csv", t, F)
    return 0


def cmd_verify(args):
    name = args.scenario
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    seed = int(args.seed) if args.seed is not None else DEFAULT_SEED
    overrides = {}
    if args.replicas is not None:
        overrides["replicas"] = int(args.replicas)
    result = run_scenario(name, seed=seed, **overrides)
    report = result.report()
    report["seed"] = seed
    out = Path(args.out or f"{name}.json")
    io.write_json(out, report)
    result.write_figure(args.svg or str(out.with_suffix(".svg")))
    for c in result.checks:
        print(c.line())
    return 0 if result.passed else 1


def cmd_kernel_diff(args):
    m = _measure(args)
    n = _positive_int(args.n, "n")
    pot = potential(m)
    scale = float(args.scale) if args.scale is not None else 1.0
    K = finite_kernel(pot, n) if scale == 1.0 else rescaled_kernel(pot, n, scale)
    ref = args.reference or "bergman"
    radius = float(args.radius if args.radius is not None else 0.7)
    if ref == "bergman":
        def ref_fn(z, w):
            return bergman_kernel_eval(1.0, "inside", z, w)
    elif ref == "bulk":
        ref_fn = bulk_limit_kernel(float(args.alpha or 2.0), float(args.lam or 1.0))
    else:
        raise ConfigError("reference must be 'bergman' or 'bulk'")
    grid = kernel_grid(radius=radius)
    d = kernel_sup_diff(K, ref_fn, grid)
    report = {"command": "kernel-diff", "measure": m.to_dict(), "n": n, "scale": scale, "reference": ref,
              "radius": radius, "sup_abs": d.sup_abs, "sup_rel": d.sup_rel, "reference_max": d.reference_max,
              "grid_points": d.points}
    io.write_json(args.out or "kernel_diff.json", report)
    if args.grid_out:
        z, w = grid
        io.write_columns_csv(args.grid_out, ["z_re", "z_im", "w_re", "w_im", "K_re", "K_im", "ref_re", "ref_im"],
                             [z.real, z.imag, w.real, w.imag, K(z, w).real, K(z, w).imag,
                              np.asarray(ref_fn(z, w)).real, np.asarray(ref_fn(z, w)).imag])
    print(f"sup |K - ref| = {d.sup_abs:.6g} (max |ref| = {d.reference_max:.6g})")
    return 0


def cmd_plot(args):
    out = args.out or "plot.svg"
    bins = int(args.bins if args.bins is not None else plotting.HIST_BINS)
    curve = int(args.curve_points if args.curve_points is not None else plotting.CURVE_POINTS)
    if args.points:
        pts = io.read_points_csv(args.points)
        plotting.scatter_svg(pts, out)
        return 0
    if args.values:
        vals = io.read_values_csv(args.values)
        dens = None
        if args.reference:
            args.kind = args.reference
            dens = plotting.density_from_cdf(_cdf_function(args))
        plotting.histogram_svg(vals, out, dens, bins=bins, curve_points=curve)
        io.write_json(str(Path(out).with_suffix(".json")),
                      {"command": "plot", "values": str(args.values), "count": int(len(vals)), "bins": bins,
                       "curve_points": curve, "reference": args.reference})
        return 0
    raise ConfigError("give --points (scatter) or --values (histogram)")


# ---------------------------------------------------------------- parser

def build_parser():
    p = argparse.ArgumentParser(prog="jellium", description="Radial Coulomb gases and random polynomial zeros.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML file with default options (flags take precedence)")
        sp.add_argument("--out", help="output file")

    def measure_opts(sp):
        sp.add_argument("--measure", help="built-in name, JSON description or JSON file")
        sp.add_argument("--measure-param", action="append", metavar="KEY=VALUE", help="built-in measure parameter")

    s = sub.add_parser("sample", help="sample a gas, polynomial zeros, or an extremal campaign")
    common(s)
    measure_opts(s)
    s.add_argument("--model", choices=["jellium", "poly_zeros", "weyl", "bergman_disk"])
    s.add_argument("--n", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--law", help="coefficient law name or JSON")
    s.add_argument("--replicas", type=int, help="run a campaign of this many replicas")
    s.add_argument("--statistic", choices=STATISTICS)
    s.add_argument("--radius", type=float, help="window radius for bergman_disk")
    s.add_argument("--threads", type=int, help="worker threads (default: JELLIUM_THREADS or 1)")
    s.add_argument("--meta", help="metadata JSON path (default: next to --out)")
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("cdf", help="tabulate a theoretical CDF")
    common(c)
    measure_opts(c)
    c.add_argument("--kind", choices=CDF_KINDS, required=False)
    c.add_argument("--R", type=float)
    c.add_argument("--alpha", type=float)
    c.add_argument("--lam", type=float)
    c.add_argument("--n", type=int)
    c.add_argument("--t", help="comma separated evaluation points")
    c.add_argument("--t-min", type=float)
    c.add_argument("--t-max", type=float)
    c.add_argument("--points", type=int)
    c.set_defaults(func=cmd_cdf)

    v = sub.add_parser("verify", help="run a named verification scenario")
    common(v)
    v.add_argument("--scenario")
    v.add_argument("--seed", type=int)
    v.add_argument("--replicas", type=int)
    v.add_argument("--svg", help="figure path (default: next to --out)")
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("kernel-diff", help="sup-norm distance between a finite kernel and a limit kernel")
    common(k)
    measure_opts(k)
    k.add_argument("--n", type=int)
    k.add_argument("--scale", type=float, help="dilation factor s (kernel of {s x_k})")
    k.add_argument("--reference", choices=["bergman", "bulk"])
    k.add_argument("--alpha", type=float)
    k.add_argument("--lam", type=float)
    k.add_argument("--radius", type=float)
    k.add_argument("--grid-out", help="CSV with kernel values on the grid")
    k.set_defaults(func=cmd_kernel_diff)

    g = sub.add_parser("plot", help="scatter plot of points or histogram against a reference")
    common(g)
    measure_opts(g)
    g.add_argument("--points", help="CSV with re,im columns")
    g.add_argument("--values", help="CSV whose first column is plotted as a histogram")
    g.add_argument("--reference", choices=CDF_KINDS, help="overlay the density of this CDF")
    g.add_argument("--R", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--lam", type=float)
    g.add_argument("--n", type=int)
    g.add_argument("--bins", type=int)
    g.add_argument("--curve-points", type=int)
    g.set_defaults(func=cmd_plot)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args, parser)
        if args.command == "verify" and not args.scenario:
            raise ConfigError("--scenario is required")
        if args.command == "cdf" and not args.kind:
            raise ConfigError("--kind is required")
        return args.func(args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"jellium {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line recipes.

Every subcommand writes its data files plus a manifest JSON with the
configuration, seed and headline numbers.  Errors are reported as one JSON
object on stderr; exit status is 0 on success, 2 for invalid input and 3
for numerical failures.
"""

import argparse
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__
from .convolution import FreeProduct, FreeSum, WignerProductSquare, compound_free_poisson
from .exceptions import FreeTailsError, ValidationError
from .freeid import (
    ClassicalTriplet,
    FreeRegularRep,
    FreeStableLaw,
    FreeStableParams,
    bercovici_pata,
    classical_compound_poisson_sample,
    minimal_gamma,
)
from .inversion import InversionConfig, stieltjes_invert, write_density_csv
from .laws import MarchenkoPasturLaw, SemicircleLaw
from .measures import AtomicMeasure, EmpiricalMeasure, measure_from_dict, pareto, uniform_grid
from .rmt import RmtConfig, compare_to_theory, sample_product_spectrum
from .tails import (
    RemainderCheckConfig,
    check_remainder_asymptotics,
    estimate_tail_index,
    hill_estimator,
    population_hill,
    tail_ratio,
)
from .transforms import ConeRegion, certified_cone, transform_grid

OUT_ENV = "FREETAILS_OUT"


# ---------------------------------------------------------------------------
# measure shorthand


def parse_measure(text):
    """``pareto:<alpha>[:<x0>]``, ``atom:<loc>[:<w>]``, ``uniform:<a>:<b>``,
    ``mp``, ``semicircle`` or ``file:<path>`` (measure JSON)."""
    parts = text.split(":")
    kind = parts[0].lower()
    try:
        nums = [float(p) for p in parts[1:]] if kind != "file" else []
    except ValueError:
        raise ValidationError(f"bad measure shorthand {text!r}") from None
    if kind == "pareto" and 1 <= len(nums) <= 2:
        return pareto(nums[0], nums[1] if len(nums) > 1 else 1.0)
    if kind == "atom" and 1 <= len(nums) <= 2:
        loc = nums[0]
        return AtomicMeasure([loc], [nums[1] if len(nums) > 1 else 1.0], "nonneg" if loc >= 0 else "real")
    if kind == "uniform" and len(nums) == 2:
        return uniform_grid(nums[0], nums[1])
    if kind == "mp" and not nums:
        return MarchenkoPasturLaw()
    if kind == "semicircle" and not nums:
        return SemicircleLaw()
    if kind == "file" and len(parts) >= 2:
        path = ":".join(parts[1:])
        if not os.path.exists(path):
            raise ValidationError(f"measure file {path!r} not found")
        with open(path) as fh:
            return measure_from_dict(json.load(fh))
    raise ValidationError(f"bad measure shorthand {text!r}")


def parse_phi(text):
    parts = text.split(":")
    if parts[0] != "stable" or len(parts) != 3:
        raise ValidationError("phi shorthand is stable:<alpha>:<rho>")
    try:
        return FreeStableLaw(FreeStableParams(float(parts[1]), float(parts[2])))
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _require_measure(m, what):
    if not hasattr(m, "to_dict"):
        raise ValidationError(f"{what} must be a measure (pareto/atom/uniform/file), not a closed-form law")
    return m


def _load_triplet(path):
    with open(path) as fh:
        d = json.load(fh)
    if d.get("gamma") == "auto":
        d["gamma"] = minimal_gamma(measure_from_dict(d["sigma"]))
    return FreeRegularRep.from_dict(d)


# ---------------------------------------------------------------------------
# output helpers


def _out_dir(args):
    d = args.out_dir or os.environ.get(OUT_ENV) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _path(args, name):
    if os.path.isabs(name) or os.path.dirname(name):
        os.makedirs(os.path.dirname(name) or ".", exist_ok=True)
        return name
    return os.path.join(_out_dir(args), name)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, float) and not np.isfinite(v):
        return str(v)
    return v


def _write_manifest(args, results, outputs, seed=None):
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": args.command,
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "seed": seed,
        "config": config,
        "results": results,
        "outputs": outputs,
    }
    path = _path(args, args.manifest or f"manifest-{args.command}.json")
    with open(path, "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
    return path


def _grid_csv(path, z, g):
    with open(path, "w") as fh:
        fh.write("re_z,im_z,re_G,im_G\n")
        for zi, gi in zip(z, g):
            vals = (zi.real, zi.imag, gi.real, gi.imag)
            fh.write(",".join(repr(float(v)) for v in vals) + "\n")


def _inversion_config(args, symmetric=False, support="nonneg"):
    return InversionConfig(
        body_max=args.body_max,
        tail_max=max(args.tail_max, args.body_max),
        symmetric=symmetric,
        support=support,
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_transform(args):
    mu = parse_measure(args.measure)
    cone = ConeRegion(args.eta, args.M) if args.M is not None else certified_cone(mu, args.eta)
    pts = cone.points(args.points)
    grid = transform_grid(mu, pts, p=args.p, source=args.measure)
    out = _path(args, args.out)
    grid.to_csv(out)
    results = {"cone": {"eta": cone.eta, "M": cone.M}, "n_points": len(pts), "signs_ok": grid.check_signs()}
    return results, [out]


def cmd_convolve(args):
    lhs, rhs = parse_measure(args.lhs), parse_measure(args.rhs)
    law = FreeSum(lhs, rhs) if args.op == "add" else FreeProduct(lhs, rhs)
    cone = ConeRegion(1.0, 1.0)
    pts = cone.points(args.points)
    g = law.cauchy(pts)
    out = _path(args, args.out)
    _grid_csv(out, pts, g)
    outputs = [out]
    results = {"op": args.op, "n_points": len(pts)}
    if args.density:
        support = "nonneg" if law.support == "nonneg" else "real"
        rec = stieltjes_invert(law.cauchy, _inversion_config(args, support=support))
        dpath = _path(args, args.density)
        write_density_csv(rec, dpath)
        outputs.append(dpath)
        results["mass"] = rec.total_mass
    return results, outputs


def cmd_levy_build(args):
    if args.nu:
        nu = _require_measure(parse_measure(args.nu), "--nu")
        rep = FreeRegularRep.from_nu(nu, args.eta_prime)
    elif args.sigma:
        sigma = _require_measure(parse_measure(args.sigma), "--sigma")
        gamma = minimal_gamma(sigma) if args.gamma == "auto" else float(args.gamma)
        rep = FreeRegularRep.from_sigma(gamma, sigma)
    elif args.triplet:
        rep = _load_triplet(args.triplet)
    else:
        raise ValidationError("one of --nu, --sigma or --triplet is required")
    out = _path(args, args.out)
    with open(out, "w") as fh:
        json.dump(_jsonable(rep.to_dict()), fh, indent=2, sort_keys=True)
    return {"gamma": rep.gamma, "eta_prime": rep.eta_prime, "flags": rep.flags}, [out]


def cmd_invert(args):
    symmetric = False
    support = "nonneg"
    if args.phi:
        law = parse_phi(args.phi)
        support = law.support if law.support != "symmetric" else "real"
    elif args.triplet:
        law = _load_triplet(args.triplet).law()
    elif args.measure:
        law = parse_measure(args.measure)
        support = "real" if law.support == "real" else "nonneg"
        symmetric = law.support == "symmetric"
    elif args.wigner_rho:
        law = WignerProductSquare(parse_measure(args.wigner_rho))
        symmetric = True
    else:
        raise ValidationError("one of --phi, --triplet, --measure or --wigner-rho is required")
    rec = stieltjes_invert(law.cauchy, _inversion_config(args, symmetric, support))
    out = _path(args, args.out)
    write_density_csv(rec, out)
    results = {
        "mass": rec.total_mass,
        "clipped_mass": rec.info["clipped_mass"],
        "fitted_alpha": rec.fitted_alpha,
        "atom_candidates": rec.info["atom_candidates"],
    }
    return results, [out]


def cmd_tail_check(args):
    if args.triplet:
        rep = _load_triplet(args.triplet)
    else:
        sigma = _require_measure(parse_measure(args.sigma), "--sigma")
        gamma = minimal_gamma(sigma) if args.gamma == "auto" else float(args.gamma)
        rep = FreeRegularRep.from_sigma(gamma, sigma)
    rec = stieltjes_invert(rep.law().cauchy, _inversion_config(args))
    x = np.geomspace(args.x_min, args.x_max, args.n)
    rs = tail_ratio(rec, rep.sigma, x)
    outputs = []
    if args.out:
        out = _path(args, args.out)
        rs.to_csv(out)
        outputs.append(out)
    results = {
        "gamma": rep.gamma,
        "ratio_at_x_max": float(rs.ratio[-1]),
        "terminal_ratio": rs.terminal_ratio,
        "ratio_min": float(np.nanmin(rs.ratio)),
        "ratio_max": float(np.nanmax(rs.ratio)),
        "mass": rec.total_mass,
        "fitted_alpha": rec.fitted_alpha,
    }
    if rep.nu is not None:
        results["nu_over_mu_at_x_max"] = float(rep.nu.tail(x[-1]) / rec.tail(x[-1]))
    return results, outputs


def cmd_remainder_check(args):
    mu = parse_measure(args.measure)
    alpha = args.alpha if args.alpha is not None else mu.alpha
    cfg = RemainderCheckConfig(args.p, alpha, args.beta, np.geomspace(args.y_min, args.y_max, args.n))
    rep = check_remainder_asymptotics(mu, cfg, with_phi=not args.no_phi)
    outputs = []
    if args.out:
        out = _path(args, args.out)
        with open(out, "w") as fh:
            json.dump(_jsonable(rep.to_dict()), fh, indent=2)
        outputs.append(out)
    results = {
        "stated": rep.stated,
        "karamata": rep.karamata,
        "measured_at_y_max": {k: float(v[-1]) for k, v in rep.measured.items()},
        "truncated_at_y_max": {k: float(v[-1]) for k, v in rep.truncated.items()},
    }
    return results, outputs


def cmd_rmt_sim(args):
    rho = _require_measure(parse_measure(args.rho), "--rho")
    cfg = RmtConfig(args.n, args.m, args.trials, rho, args.seed)
    t0 = time.time()
    spectrum = sample_product_spectrum(cfg)
    out = _path(args, args.out)
    with open(out, "w") as fh:
        fh.write("eigenvalue\n")
        for v in spectrum.sample.values:
            fh.write(f"{float(v)!r}\n")
    a_h, thr, k = hill_estimator(spectrum.sample.values)
    results = {"hill_alpha": a_h, "hill_threshold": thr, "hill_k": k, "clipped": spectrum.clipped,
               "seconds": time.time() - t0}
    if isinstance(rho, AtomicMeasure) and len(rho.locations) == 1 and args.n == args.m:
        cmp = compare_to_theory(spectrum.sample, MarchenkoPasturLaw(1.0, float(rho.locations[0])))
        results["ks_vs_mp"] = cmp.ks
    elif np.isinf(rho.upper_bound()):
        x = np.geomspace(np.quantile(spectrum.sample.values, 0.99), np.quantile(spectrum.sample.values, 0.999), 20)
        results["terminal_tail_ratio_vs_rho"] = tail_ratio(spectrum.sample, rho, x).terminal_ratio
    return results, [out], args.seed


def cmd_bp_check(args):
    nu = _require_measure(parse_measure(args.nu), "--nu")
    n = int(float(args.samples))
    if abs(nu.total_mass - 1.0) > 1e-9:
        raise ValidationError("bp-check samples a compound Poisson law and needs a probability Lévy measure")
    classical = ClassicalTriplet.compound_poisson(1.0, nu)
    classical = ClassicalTriplet(classical.eta + args.eta_prime, 0.0, classical.nu)
    rep, bp = bercovici_pata(classical, report=True)
    sample = classical_compound_poisson_sample(1.0, nu, n, args.seed)
    sample = EmpiricalMeasure(sample.values + args.eta_prime, "nonneg")
    a_c, thr, k = hill_estimator(sample.values)
    rec = stieltjes_invert(rep.law().cauchy, _inversion_config(args))
    a_f = population_hill(rec, thr)
    q = float(np.quantile(sample.values, 0.999))
    ratio = float(sample.tail(q) / rec.tail(q))
    results = {
        "eta": bp.eta,
        "eta_prime": bp.eta_prime,
        "flags": bp.flags,
        "hill_classical": a_c,
        "hill_free": a_f,
        "hill_difference": abs(a_c - a_f),
        "hill_threshold": thr,
        "hill_k": k,
        "quantile_999": q,
        "tail_ratio_classical_over_free": ratio,
        "free_mass": rec.total_mass,
    }
    return results, [], args.seed


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="freetails", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_ENV} or .)")
        sp.add_argument("--manifest", default=None, help="manifest file name")

    def inv(sp):
        sp.add_argument("--body-max", type=float, default=10.0)
        sp.add_argument("--tail-max", type=float, default=1e4)

    sp = sub.add_parser("transform", help="G, F, phi, C and remainders on cone points")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--M", type=float, default=None)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--out", default="transform.csv")
    common(sp)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("convolve", help="free additive or multiplicative convolution")
    sp.add_argument("--op", choices=["add", "mul"], required=True)
    sp.add_argument("--lhs", required=True)
    sp.add_argument("--rhs", required=True)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--out", default="convolve.csv")
    sp.add_argument("--density", default=None, help="also write the recovered density to this CSV")
    inv(sp)
    common(sp)
    sp.set_defaults(func=cmd_convolve)

    sp = sub.add_parser("levy-build", help="complete a Lévy–Khintchine triplet")
    sp.add_argument("--nu")
    sp.add_argument("--eta-prime", type=float, default=0.0)
    sp.add_argument("--sigma")
    sp.add_argument("--gamma", default="auto")
    sp.add_argument("--triplet")
    sp.add_argument("--out", default="triplet.json")
    common(sp)
    sp.set_defaults(func=cmd_levy_build)

    sp = sub.add_parser("invert", help="Stieltjes inversion to a density CSV")
    sp.add_argument("--phi")
    sp.add_argument("--triplet")
    sp.add_argument("--measure")
    sp.add_argument("--wigner-rho")
    sp.add_argument("--out", default="density.csv")
    inv(sp)
    common(sp)
    sp.set_defaults(func=cmd_invert)

    sp = sub.add_parser("tail-check", help="tail ratio of the free regular law against sigma")
    sp.add_argument("--sigma")
    sp.add_argument("--gamma", default="auto")
    sp.add_argument("--triplet")
    sp.add_argument("--x-min", type=float, default=50.0)
    sp.add_argument("--x-max", type=float, default=500.0)
    sp.add_argument("--n", type=int, default=41)
    sp.add_argument("--out", default=None)
    inv(sp)
    common(sp)
    sp.set_defaults(func=cmd_tail_check)

    sp = sub.add_parser("remainder-check", help="remainder asymptotics of G and phi")
    sp.add_argument("--measure", required=True)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--alpha", type=float, default=None)
    sp.add_argument("--beta", type=float, default=0.25)
    sp.add_argument("--y-min", type=float, default=1e2)
    sp.add_argument("--y-max", type=float, default=1e3)
    sp.add_argument("--n", type=int, default=9)
    sp.add_argument("--no-phi", action="store_true")
    sp.add_argument("--out", default=None)
    common(sp)
    sp.set_defaults(func=cmd_remainder_check)

    sp = sub.add_parser("rmt-sim", help="pooled spectra of Wishart times diagonal products")
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--m", type=int, default=500)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--rho", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default="eig.csv")
    common(sp)
    sp.set_defaults(func=cmd_rmt_sim)

    sp = sub.add_parser("bp-check", help="classical compound Poisson vs its free image")
    sp.add_argument("--nu", required=True)
    sp.add_argument("--eta-prime", type=float, default=0.0)
    sp.add_argument("--samples", default="1e6")
    sp.add_argument("--seed", type=int, default=0)
    inv(sp)
    common(sp)
    sp.set_defaults(func=cmd_bp_check)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ret = args.func(args)
        if len(ret) == 3:
            results, outputs, seed = ret
        else:
            (results, outputs), seed = ret, None
        manifest = _write_manifest(args, results, outputs, seed)
        print(manifest)
        return 0
    except FreeTailsError as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": exc.exit_code}
        print(json.dumps(err), file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "exit_code": 2}
        print(json.dumps(err), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

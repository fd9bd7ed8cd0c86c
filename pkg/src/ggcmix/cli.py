"""Command-line interface: ``ggcmix <command> [options]``.

Every command writes a JSON report ``{command, config, verdict, witnesses,
metrics, version}`` (plus ``timestamp`` unless ``--no-timestamp``) to stdout
or ``--out``.  Exit codes: 0 all properties hold, 1 a violation was found
(witnesses present), 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from typing import Callable, Optional

import mpmath as mp
import numpy as np

from . import __version__
from .dist import Density, ThorinSpec, ggc_laplace, normalization, parse_density
from .errors import (
    BranchError,
    CatalogError,
    DegenerateError,
    DomainError,
    ExtrapolationError,
    HorizonError,
    IntegrabilityError,
    NormalizationError,
    PrecisionError,
    QuadratureError,
    SplitSupportError,
    UnsupportedSamplerError,
)
from .hyperbolic import HMConfig, hm_test, logconcavity_test
from .identities import DEFAULT_GRID, SUITES
from .levy import LevySpec, dufresne_law, ks_distance, simulate_exp_functional
from .mixtures import CATALOG_NAMES, MixtureDensity, catalog, default_grid, export_csv
from .transforms import CMConfig, HCMConfig, cm_test, hcm_test, laplace, product_lt, stieltjes_k

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

USAGE_ERRORS = (DomainError, CatalogError, IntegrabilityError, NormalizationError, SplitSupportError,
                UnsupportedSamplerError, DegenerateError, ExtrapolationError, json.JSONDecodeError)
NUMERIC_ERRORS = (QuadratureError, PrecisionError, BranchError, HorizonError, ArithmeticError,
                  ZeroDivisionError, OverflowError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers


def _density(args) -> Density:
    if getattr(args, "catalog", None):
        return catalog(args.catalog).construction
    if not args.density:
        raise UsageError("a --density (JSON or name:p1,p2) or --catalog NAME is required")
    return parse_density(args.density)


def expression(text: str) -> Callable:
    """Compile an expression in ``s`` to an mpmath callable."""
    import sympy

    s = sympy.Symbol("s")
    try:
        expr = sympy.sympify(text, locals={"s": s})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise UsageError(f"cannot parse expression {text!r}: {exc}") from None
    extra = expr.free_symbols - {s}
    if extra:
        raise UsageError(f"expression may only use the variable s, found {sorted(map(str, extra))}")
    return sympy.lambdify(s, expr, modules="mpmath")


def _transform(args) -> tuple[Callable, dict]:
    """The function handle selected by --expr / --laplace / --stieltjes / --product / --thorin."""
    if args.expr:
        return expression(args.expr), {"expr": args.expr}
    if args.thorin:
        spec = ThorinSpec.from_dict(json.loads(args.thorin))
        return (lambda s: ggc_laplace(spec, s)), {"thorin": spec.to_dict()}
    f = _density(args)
    desc = {"density": f.to_dict()}
    if args.stieltjes:
        k = args.k
        return (lambda s: stieltjes_k(f, k, s)), {**desc, "transform": "stieltjes", "k": k}
    if args.product:
        k = args.k
        return (lambda s: product_lt(f, k, s)), {**desc, "transform": "product", "k": k}
    return (lambda s: laplace(f, s)), {**desc, "transform": "laplace"}


def _add_transform_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--expr", help="expression in s, e.g. 'exp(-s)'")
    g.add_argument("--laplace", action="store_true", help="Laplace transform of --density (default)")
    g.add_argument("--stieltjes", action="store_true", help="order-k Stieltjes transform of --density")
    g.add_argument("--product", action="store_true", help="(1 + s x)^-k transform of --density")
    g.add_argument("--thorin", help='GGC Laplace transform, JSON {"a": ..., "atoms": [[t, u], ...]}')
    p.add_argument("--density", help="density JSON or shorthand name:p1,p2")
    p.add_argument("--catalog", choices=CATALOG_NAMES, help="use a catalog construction as density")
    p.add_argument("--k", type=float, default=1.0, help="order of the gamma factor")


def _cm_config(args) -> CMConfig:
    return CMConfig(n_s=args.n_s, tol_abs=args.tol_abs, tol_rel=args.tol_rel,
                    precision=args.precision, max_precision=max(args.precision, args.max_precision))


def _add_cm_args(p, n_max):
    p.add_argument("--n-max", type=int, default=n_max)
    p.add_argument("--n-s", type=int, default=41)
    p.add_argument("--tol-abs", type=float, default=0.0)
    p.add_argument("--tol-rel", type=float, default=1e-20)
    p.add_argument("--max-precision", type=int, default=2048)


# ---------------------------------------------------------------------------
# commands


def cmd_check_hm(args):
    f = _density(args)
    cfg = HMConfig(n_u=args.n_u, n_w=args.n_w, tol_abs=args.tol_abs, tol_rel=args.tol_rel,
                   precision=args.precision)
    rep = hm_test(f, args.order, cfg)
    out = rep.to_dict()
    metrics = {"violations": rep.meta["violations"], "vacuous": rep.meta["vacuous"],
               "grid": out["grid"], "tolerance": out["tolerance"]}
    if args.logconcavity:
        lc = logconcavity_test(f)
        metrics["logconcave"] = lc.logconcave
        metrics["hm1_certificate"] = lc.hm1_certificate
    config = {"density": f.to_dict(), "order": args.order, "n_u": args.n_u, "n_w": args.n_w,
              "tol_abs": args.tol_abs, "tol_rel": args.tol_rel}
    return rep.verdict, out["witnesses"], metrics, config


def cmd_check_cm(args):
    phi, desc = _transform(args)
    lo, hi = args.interval
    rep = cm_test(phi, (lo, hi), args.n_max, _cm_config(args))
    out = rep.to_dict()
    metrics = {"precision_bits": rep.precision, **rep.meta}
    return rep.verdict, out["witnesses"], metrics, {**desc, "interval": [lo, hi], "n_max": args.n_max}


def cmd_check_hcm(args):
    phi, desc = _transform(args)
    cfg = HCMConfig(w_max=args.w_max, n_max=args.n_max, cm=_cm_config(args))
    if args.refine:
        cfg = cfg.with_refinement(args.refine[0], args.refine[1], args.refine_n)
    rep = hcm_test(phi, cfg)
    metrics = {"failing_u": rep.meta["failing_u"], "grid": rep.grid}
    config = {**desc, "n_max": args.n_max, "w_max": args.w_max,
              "refine": list(args.refine) if args.refine else None}
    return rep.verdict, rep.witnesses, metrics, config


def cmd_mix(args):
    left, right = parse_density(args.left), parse_density(args.right)
    m = MixtureDensity(left, right, args.op)
    if args.grid:
        lo, hi, n = args.grid
        xs = np.geomspace(lo, hi, int(n))
    else:
        xs = default_grid(m, 101)
    if args.csv:
        export_csv(m, xs, args.csv)
    z = normalization(m)
    err = abs(z - 1.0)
    witnesses = [] if err <= args.tol else [{"normalization": z, "error": err}]
    metrics = {"normalization": z, "points": len(xs), "csv": args.csv}
    config = {"left": left.to_dict(), "right": right.to_dict(), "op": args.op, "tol": args.tol}
    return ("fail" if witnesses else "pass"), witnesses, metrics, config


def cmd_verify(args):
    fn = SUITES[args.identity]
    if args.identity == "eq2eq3":
        res = fn(int(args.k), args.trials, args.seed)
    elif args.identity == "eq4":
        res = fn(int(args.k), args.trials, args.seed)
    elif args.identity == "gf":
        res = fn(int(args.k), args.trials, args.seed)
    elif args.identity == "asymptotic":
        res = fn(args.k)
    else:
        grid = DEFAULT_GRID if not args.grid else tuple(tuple(map(float, g.split(","))) for g in args.grid)
        res = fn(args.k, grid, args.n_max)
    config = {"identity": args.identity, "k": args.k, "trials": args.trials, "seed": args.seed}
    return res.verdict, res.witnesses, res.metrics, config


def cmd_simulate(args):
    spec = LevySpec.from_dict(json.loads(args.levy))
    batch = simulate_exp_functional(spec, args.horizon, args.dt, args.n, args.seed)
    if args.csv:
        batch.to_csv(args.csv)
    x = batch.samples
    metrics = {"n": int(x.size), "mean": float(np.mean(x)), "median": float(np.median(x)),
               "max": float(np.max(x)), "min": float(np.min(x)), "horizon": batch.meta["horizon"],
               "median_tail": batch.meta["median_tail"]}
    witnesses = []
    if spec.kind == "brownian" and args.ks_threshold is not None:
        d = ks_distance(batch, dufresne_law(spec.sigma2, spec.a))
        metrics["ks_dufresne"] = d
        if d >= args.ks_threshold:
            witnesses.append({"ks_distance": d, "threshold": args.ks_threshold})
    if spec.kind == "drift-minus-subordinator":
        bound = 1.0 / abs(spec.a) + 10 * args.dt
        metrics["bound"] = bound
        if np.max(x) > bound:
            witnesses.append({"max": float(np.max(x)), "bound": bound})
    config = {"levy": spec.to_dict(), "n": args.n, "dt": args.dt, "horizon": args.horizon,
              "seed": args.seed, "ks_threshold": args.ks_threshold}
    return ("fail" if witnesses else "pass"), witnesses, metrics, config


def cmd_catalog(args):
    names = [args.name] if args.name else list(CATALOG_NAMES)
    entries = []
    witnesses = []
    for name in names:
        e = catalog(name)
        row = e.to_dict()
        if args.s:
            row["lt"] = {repr(s): e.lt(s) for s in args.s}
        if args.x:
            row["pdf"] = {repr(x): e.pdf(x) for x in args.x}
        if args.check:
            errs = [abs(laplace(e.construction, s) - e.lt(s)) for s in np.geomspace(0.01, 100, 20)]
            row["max_lt_error"] = max(errs)
            if max(errs) > 1e-6:
                witnesses.append({"name": name, "max_lt_error": max(errs)})
        entries.append(row)
    return ("fail" if witnesses else "pass"), witnesses, {"entries": entries}, {
        "name": args.name, "s": args.s, "x": args.x, "check": args.check}


# ---------------------------------------------------------------------------
# parser and runner


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ggcmix", description="Gamma-mixture GGC toolkit")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
        sp.add_argument("--threads", type=int, default=1, help="worker cap (recorded in the report)")
        sp.add_argument("--precision", type=int, default=256, help="working precision in bits")

    sp = sub.add_parser("check-hm", help="HM_k detector")
    common(sp)
    sp.add_argument("--density")
    sp.add_argument("--catalog", choices=CATALOG_NAMES)
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("--n-u", type=int, default=33)
    sp.add_argument("--n-w", type=int, default=65)
    sp.add_argument("--tol-abs", type=float, default=1e-10)
    sp.add_argument("--tol-rel", type=float, default=1e-6)
    sp.add_argument("--logconcavity", action="store_true", help="also run the log-concavity test")
    sp.set_defaults(func=cmd_check_hm)

    sp = sub.add_parser("check-cm", help="complete monotonicity detector")
    common(sp)
    _add_transform_args(sp)
    _add_cm_args(sp, 8)
    sp.add_argument("--interval", type=float, nargs=2, default=(1e-3, 1e3), metavar=("LO", "HI"))
    sp.set_defaults(func=cmd_check_cm)

    sp = sub.add_parser("check-hcm", help="hyperbolic complete monotonicity detector")
    common(sp)
    _add_transform_args(sp)
    _add_cm_args(sp, 8)
    sp.add_argument("--w-max", type=float, default=50.0)
    sp.add_argument("--refine", type=float, nargs=2, metavar=("U_LO", "U_HI"),
                    help="add geometric u-centres on [U_LO, U_HI]")
    sp.add_argument("--refine-n", type=int, default=17)
    sp.set_defaults(func=cmd_check_hcm)

    sp = sub.add_parser("mix", help="product or ratio density on a grid")
    common(sp)
    sp.add_argument("--left", required=True, help="density of Y")
    sp.add_argument("--right", required=True, help="density of X")
    sp.add_argument("--op", choices=("product", "ratio"), default="product")
    sp.add_argument("--grid", type=float, nargs=3, metavar=("LO", "HI", "N"))
    sp.add_argument("--csv", help="write x,f(x) rows here")
    sp.add_argument("--tol", type=float, default=1e-6, help="normalization tolerance")
    sp.set_defaults(func=cmd_mix)

    sp = sub.add_parser("verify", help="closed-form identity suites")
    common(sp)
    sp.add_argument("--identity", required=True, choices=sorted(SUITES))
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--grid", nargs="+", metavar="A,B", help="(a, b) pairs for cm-real-k")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="exponential functional of a Levy process")
    common(sp)
    sp.add_argument("--levy", required=True,
                    help='JSON, e.g. {"kind": "brownian", "a": -1, "sigma2": 2}')
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv", help="write the samples here")
    sp.add_argument("--ks-threshold", type=float, help="fail when the Dufresne KS distance reaches this")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("catalog", help="closed-form Gamma(k) mixtures")
    common(sp)
    sp.add_argument("--name", choices=CATALOG_NAMES)
    sp.add_argument("--s", type=float, nargs="+", help="evaluate the Laplace transform here")
    sp.add_argument("--x", type=float, nargs="+", help="evaluate the density here")
    sp.add_argument("--check", action="store_true", help="compare closed forms with numeric transforms")
    sp.set_defaults(func=cmd_catalog)
    return p


def _config_echo(args) -> dict:
    skip = {"func", "out", "no_timestamp"}
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(report: dict, out: Optional[str]):
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, (mp.mpf,)):
        return float(o)
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return repr(o)
    return str(o)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required: " + ", ".join(
                ["check-hm", "check-cm", "check-hcm", "mix", "verify", "simulate", "catalog"]))
    except UsageError as exc:
        sys.stderr.write(f"ggcmix: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        with mp.workprec(args.precision):
            verdict, witnesses, metrics, config = args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"ggcmix: error: {exc}\n")
        return EXIT_USAGE
    except USAGE_ERRORS as exc:
        sys.stderr.write(f"ggcmix: configuration error: {exc}\n")
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        extra = f" (suggested horizon {exc.suggested:.6g})" if isinstance(exc, HorizonError) and exc.suggested else ""
        sys.stderr.write(f"ggcmix: numerical failure: {type(exc).__name__}: {exc}{extra}\n")
        return EXIT_NUMERIC
    report = {
        "command": args.command,
        "config": {**_config_echo(args), **config, "threads": args.threads},
        "verdict": verdict,
        "witnesses": witnesses,
        "metrics": metrics,
        "version": __version__,
    }
    if not args.no_timestamp:
        report["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _emit(report, args.out)
    return EXIT_FAIL if witnesses else EXIT_PASS


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

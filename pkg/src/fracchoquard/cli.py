"""Command-line interface: ``fracchoquard <command> ...``.

Exit codes: 0 success, 2 invalid input (including unsupported regimes),
3 solver or eigensolver nonconvergence, 4 I/O or file-format errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis
from .errors import ChoquardError, EigensolverStall, FormatError, NotConverged, ValidationError, WindowTooNoisy
from .functionals import functional_suite
from .io import (
    IoError,
    RunConfig,
    build_run_config,
    load_config,
    read_field,
    write_field,
    write_json,
    write_manifest,
)
from .params import classify_regime, validate_params
from .solvers import SolverOptions, solve_ground_state_ngf, solve_petviashvili
from .spectral import ConvolutionMode, make_grid, sample

log = logging.getLogger("fracchoquard")

EXIT_OK, EXIT_INVALID, EXIT_NOCONV, EXIT_IO = 0, 2, 3, 4


class ArgumentError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    # report usage errors through the same exit-code path as validation errors
    def error(self, message):
        raise ArgumentError(f"{self.prog}: {message}")


# -- shared option groups ---------------------------------------------------------


def _add_params(p):
    g = p.add_argument_group("problem parameters")
    g.add_argument("--config", help="key = value file; flags override its values")
    g.add_argument("--dim", type=int)
    g.add_argument("--s", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--omega", type=float)


def _add_grid(p):
    g = p.add_argument_group("grid")
    g.add_argument("--n", type=int, help="points per axis")
    g.add_argument("--L", type=float, help="half width of the box")
    g.add_argument("--mode", choices=[m.value for m in ConvolutionMode])


def _add_solver(p):
    g = p.add_argument_group("solver")
    g.add_argument("--solver", choices=["ngf", "petviashvili"])
    g.add_argument("--rho", type=float, help="L2 norm for the ngf solver")
    g.add_argument("--dt", type=float)
    g.add_argument("--max-iter", type=int, dest="max_iter")
    g.add_argument("--tol", type=float)
    g.add_argument("--noise", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--symmetry", help="radial | block-radial:M | odd-swap:M")


def _add_analysis(p):
    g = p.add_argument_group("certificate extras")
    g.add_argument("--morse", type=int, metavar="K", help="compute the K lowest Hessian eigenvalues")
    g.add_argument("--decay-window", type=float, nargs=2, metavar=("RMIN", "RMAX"))
    g.add_argument("--plots", action="store_true", help="also render PNG figures next to the CSV files")


_KEYS = ("dim", "s", "alpha", "p", "omega", "n", "L", "mode", "solver", "rho", "dt", "max_iter", "tol",
         "noise", "seed", "symmetry", "out")


def _merged(args) -> dict:
    values = dict(load_config(args.config)) if getattr(args, "config", None) else {}
    values = {("L" if k == "l" else k): v for k, v in values.items()}
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _require(values, keys):
    for key in keys:
        if key not in values:
            raise ValidationError(f"missing required setting {key!r}")


def _params_from(args, omega_default=1.0):
    v = _merged(args)
    _require(v, ("dim", "s", "alpha", "p"))
    omega = float(v.get("omega", omega_default))
    return validate_params(v["dim"], v["s"], v["alpha"], v["p"], omega, zero_mass=omega == 0.0)


# -- solve ------------------------------------------------------------------------------


def run_solve(cfg: RunConfig, out: Path, morse_k=None, decay_window=None, plots=False) -> dict:
    """Run one configured solve, write its artifacts to ``out`` and return
    the summary row used by ``sweep``."""
    grid = cfg.grid()
    opts = SolverOptions(
        dt=cfg.dt, max_iter=cfg.max_iter, tol=cfg.tol, seed=cfg.seed, symmetry=cfg.symmetry,
        noise=cfg.noise, mode=cfg.mode,
    )
    if cfg.solver == "ngf":
        report = solve_ground_state_ngf(cfg.params, cfg.rho, grid, opts, certify=False)
    else:
        report = solve_petviashvili(cfg.params, cfg.params.omega, grid, opts, certify=False)
    out.mkdir(parents=True, exist_ok=True)
    write_field(out / "field.chqf", report.field)
    cert = None
    if report.termination.value != "Diverged":
        kw = {"rho": cfg.rho, "lam": report.lagrange_multiplier} if cfg.solver == "ngf" else {"omega": cfg.params.omega}
        try:
            cert = analysis.certify(
                report.field, report.params, mode=cfg.mode, morse_k=morse_k, decay_window=decay_window,
                converged=report.converged, seed=cfg.seed, **kw,
            )
        except WindowTooNoisy as exc:
            log.warning("decay fit skipped: %s", exc)
            cert = analysis.certify(report.field, report.params, mode=cfg.mode, morse_k=morse_k,
                                    converged=report.converged, seed=cfg.seed, **kw)
        report.certificate = cert
        write_json(out / "certificate.json", cert.to_json())
    write_json(out / "report.json", report.to_json())
    with open(out / "history.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", "energy", "residual"])
        w.writerows(report.history)
    analysis.write_profile_csv(out / "profile.csv", report.field)
    if cert is not None and cert.decay is not None:
        cert.decay.write_csv(out / "decay.csv")
    if plots:
        from . import plotting

        plotting.plot_history(report.history, out / "history.png", f"{cfg.solver}: {report.termination.value}")
        plotting.plot_profile(report.field, out / "profile.png")
        if cert is not None and cert.decay is not None:
            plotting.plot_decay(cert.decay, out / "decay.png")
        if cert is not None and cert.morse is not None:
            plotting.plot_spectrum(cert.morse, out / "spectrum.png")
    row = {**cfg.as_dict(), "termination": report.termination.value, "iterations": report.iterations,
           "lambda": report.lagrange_multiplier}
    if cert is not None:
        fv = cert.functionals
        row.update(K=fv.K, M=fv.M, P=fv.P, e_omega=fv.e_omega, e_zero=fv.e_zero, s_quot=fv.s_quot,
                   nehari_res=fv.nehari_res, pohozaev_res=fv.pohozaev_res)
    return row


def cmd_solve(args, argv):
    cfg = build_run_config(_merged(args))
    out = Path(args.out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, "solve", argv, cfg.as_dict(), cfg.seed)
    row = run_solve(cfg, out, args.morse, args.decay_window, args.plots)
    print(json.dumps({k: row.get(k) for k in ("termination", "iterations", "lambda", "nehari_res", "pohozaev_res")}))
    if row["termination"] != "Converged":
        print(f"solver stopped without converging: {row['termination']}", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


# -- certify / spectrum ---------------------------------------------------------------------


def cmd_certify(args, argv):
    u = read_field(args.field)
    v = _merged(args)
    v.setdefault("dim", u.grid.dim)
    _require(v, ("s", "alpha", "p"))
    if args.omega is None and args.rho is None:
        raise ValidationError("certify needs --omega (fixed frequency) or --rho (fixed mass)")
    omega = args.omega if args.omega is not None else 1.0
    params = validate_params(v["dim"], v["s"], v["alpha"], v["p"], omega, zero_mass=omega == 0)
    if params.dim != u.grid.dim:
        raise ValidationError(f"field is {u.grid.dim}-dimensional but dim = {params.dim}")
    mode = ConvolutionMode(args.mode or ConvolutionMode.FREE_SPACE.value)
    kw = {"omega": args.omega} if args.omega is not None else {"rho": args.rho}
    cert = analysis.certify(u, params, mode=mode, morse_k=args.morse, decay_window=args.decay_window, **kw)
    doc = cert.to_json()
    if args.out:
        out = Path(args.out)
        write_json(out / "certificate.json", doc)
        write_manifest(out, "certify", argv, {"field": str(args.field), **params.as_dict()}, None)
        if cert.decay is not None:
            cert.decay.write_csv(out / "decay.csv")
            if args.plots:
                from . import plotting

                plotting.plot_decay(cert.decay, out / "decay.png")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_spectrum(args, argv):
    u = read_field(args.field)
    params = _params_from(args)
    lam = args.lam if args.lam is not None else params.omega
    mode = ConvolutionMode(args.mode or ConvolutionMode.FREE_SPACE.value)
    morse = analysis.morse_spectrum(u, lam, params, args.k, mode=mode, seed=args.seed or 0)
    doc = morse.to_json()
    if args.out:
        out = Path(args.out)
        write_json(out / "spectrum.json", doc)
        write_manifest(out, "spectrum", argv, {"field": str(args.field), "lambda": lam, "k": args.k,
                                                **params.as_dict()}, args.seed)
        with open(out / "spectrum.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue"])
            w.writerows(enumerate(morse.eigenvalues))
        if args.plots:
            from . import plotting

            plotting.plot_spectrum(morse, out / "spectrum.png")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# -- bubble / scaling ------------------------------------------------------------------------


def cmd_bubble(args, argv):
    grid = make_grid(args.dim, args.n, args.L)
    x0 = None if args.x0 is None else [float(c) for c in args.x0]
    if x0 is not None and len(x0) != args.dim:
        raise ValidationError(f"--x0 needs {args.dim} coordinates")
    res = analysis.make_bubble(grid, args.s, args.t, x0, args.C)
    fv = functional_suite(res.field, res.params)
    doc = {
        "constant": res.constant,
        "residual": res.residual,
        "exterior_quadrature": res.exterior,
        "params": res.params.as_dict(),
        "functionals": fv.to_json(),
        "low_dimensional_extrapolation": args.dim < 3,
    }
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_field(out / "bubble.chqf", res.field)
        write_json(out / "bubble.json", doc)
        write_manifest(out, "bubble", argv, {"dim": args.dim, "s": args.s, "t": args.t, "n": args.n, "L": args.L,
                                              "x0": x0, "C": args.C}, None)
        analysis.write_profile_csv(out / "profile.csv", res.field)
        if args.plots:
            from . import plotting

            plotting.plot_profile(res.field, out / "profile.png", "bubble profile")
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def trial_field(grid, kind="gaussian", seed=0):
    """Smooth test fields: a centred Gaussian or a seeded Gaussian mixture."""
    if kind == "gaussian":
        return sample(grid, lambda *x: np.exp(-0.5 * sum(c * c for c in x)))
    if kind != "mixture":
        raise ValidationError(f"unknown trial {kind!r} (gaussian | mixture)")
    return analysis.gaussian_mixture(grid, np.random.default_rng(seed))


def cmd_scaling(args, argv):
    params = _params_from(args)
    grid = make_grid(params.dim, args.n or 1024, args.L or 20.0)
    u = trial_field(grid, args.trial, args.seed or 0)
    fv = functional_suite(u, params, ConvolutionMode(args.mode or ConvolutionMode.FREE_SPACE.value))
    rep = analysis.scaling_report(fv, params)
    doc = {"trial": args.trial, "seed": args.seed or 0, "regime": classify_regime(params).tag.value,
           "functionals": fv.to_json(), "scaling": rep.to_json()}
    if args.out:
        write_json(Path(args.out) / "scaling.json", doc)
        write_manifest(args.out, "scaling-test", argv, {**params.as_dict(), "trial": args.trial}, args.seed)
    print(json.dumps(doc, indent=2))
    return EXIT_OK


# -- sweep / regime -------------------------------------------------------------------------------


def _sweep_worker(job):
    values, out, morse, window = job
    cfg = build_run_config(values)
    try:
        return run_solve(cfg, Path(out), morse, window)
    except ChoquardError as exc:
        return {**cfg.as_dict(), "termination": type(exc).__name__, "error": str(exc)}


SWEEP_COLUMNS = ["index", "dim", "s", "alpha", "p", "omega", "n", "L", "solver", "rho", "seed", "termination",
                 "iterations", "lambda", "K", "M", "P", "e_omega", "e_zero", "s_quot", "nehari_res",
                 "pohozaev_res"]


def cmd_sweep(args, argv):
    base = _merged(args)
    build_run_config(base)
    out = Path(args.out or base.get("out", "sweep"))
    out.mkdir(parents=True, exist_ok=True)
    jobs = []
    for i, value in enumerate(args.values):
        values = dict(base, **{args.vary: value})
        jobs.append((values, str(out / f"run_{i:03d}"), args.morse, args.decay_window))
    write_manifest(out, "sweep", argv, {"base": base, "vary": args.vary, "values": args.values}, base.get("seed"))
    if args.workers == 1:
        rows = [_sweep_worker(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for i, row in enumerate(rows):
            w.writerow({"index": i, **{k: ("" if v is None else v) for k, v in row.items()}})
    if args.plots:
        from . import plotting

        good = [r for r in rows if "e_omega" in r]
        if good:
            plotting.plot_sweep(good, args.vary, out / "summary.png")
    bad = [r for r in rows if r["termination"] != "Converged"]
    print(f"{len(rows) - len(bad)}/{len(rows)} runs converged; summary in {out / 'summary.csv'}")
    return EXIT_NOCONV if bad else EXIT_OK


def cmd_regime(args, argv):
    v = _merged(args)
    _require(v, ("dim", "s", "alpha"))
    if args.values:
        ps = args.values
    else:
        base = validate_params(v["dim"], v["s"], v["alpha"], 2.0, 1.0)
        hi = base.p_high if math.isfinite(base.p_high) else base.p_mass + 2.0
        ps = list(np.linspace(1.0 + 1e-3, hi + 0.5, args.count))
    w = csv.writer(sys.stdout)
    w.writerow(["p", "regime", "p_low", "p_mass", "p_high", "pohozaev_verdict"])
    for p in ps:
        params = validate_params(v["dim"], v["s"], v["alpha"], p, float(v.get("omega", 1.0)),
                                 zero_mass=float(v.get("omega", 1.0)) == 0.0)
        reg = classify_regime(params)
        verdict = analysis.pohozaev_obstruction(params).verdict if params.omega > 0 else ""
        w.writerow([repr(float(p)), reg.tag.value, repr(reg.p_low), repr(reg.p_mass), repr(reg.p_high), verdict])
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="fracchoquard", description="Spectral lab for fractional Choquard ground states.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="run a solver and write field + certificate")
    _add_params(p)
    _add_grid(p)
    _add_solver(p)
    _add_analysis(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", help="certify a stored field")
    p.add_argument("--field", required=True)
    _add_params(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--mode", choices=[m.value for m in ConvolutionMode])
    _add_analysis(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("bubble", help="calibrate a zero-mass bubble and report its residual")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--x0", type=float, nargs="+")
    p.add_argument("--C", type=float)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bubble)

    p = sub.add_parser("scaling-test", help="scaling laws on a named trial field")
    _add_params(p)
    _add_grid(p)
    p.add_argument("--trial", default="gaussian", choices=["gaussian", "mixture"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("spectrum", help="lowest Hessian eigenvalues of a stored field")
    p.add_argument("--field", required=True)
    _add_params(p)
    p.add_argument("--lam", type=float, help="multiplier (defaults to omega)")
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--mode", choices=[m.value for m in ConvolutionMode])
    p.add_argument("--seed", type=int)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="solve over a list of p or omega values in parallel")
    _add_params(p)
    _add_grid(p)
    _add_solver(p)
    _add_analysis(p)
    p.add_argument("--vary", choices=["p", "omega"], required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regime", help="classify a range of p values")
    _add_params(p)
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--count", type=int, default=12)
    p.set_defaults(func=cmd_regime)
    return parser


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (IoError, FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"invalid input ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NotConverged, EigensolverStall) as exc:
        print(f"no convergence ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NOCONV


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

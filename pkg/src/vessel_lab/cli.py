"""Command-line entry point.

Exit codes: 0 success, 1 numeric or invariant failure, 2 input or schema failure.
Machine-readable JSON goes to stdout (or --out); a one-line summary goes to stderr.
"""

from __future__ import annotations

import argparse
import cmath
import json
import sys

from . import errata, pde_verify, realization, scattering, solitons
from .errors import (
    DegenerateFit,
    OnSpectrum,
    SchemaError,
    SingularState,
    TooFewPoints,
    VesselLabError,
)
from .evolution import propagate
from .params import canonical_parameters

EXIT_OK, EXIT_NUMERIC, EXIT_INPUT = 0, 1, 2

LADDER_THRESHOLD = 1e-6
ODE_THRESHOLD = 1e-6
BACKLUND_THRESHOLD = 1e-5
#: maximum number of grid points fed to the ladder residual
LADDER_POINTS = 200

def parse_complex(text: str) -> complex:
    """Parse ``a``, ``bi``, ``a+bi``, ``a-bi``, ``i`` or ``-i`` (``j`` also accepted)."""
    s = text.strip().replace("i", "j")
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    try:
        z = complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None
    if not cmath.isfinite(z):
        raise argparse.ArgumentTypeError(f"not a finite complex number: {text!r}")
    return z


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _emit(doc, out=None):
    text = json.dumps(doc, indent=1, default=pde_verify._json_default) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path):
    try:
        return realization.load(path)
    except OSError as exc:
        raise _Failure(EXIT_INPUT, f"cannot read {path}: {exc.strerror or exc}") from exc


def _grid(args):
    try:
        return pde_verify.GridSpec(args.x0, args.x1, args.nx, args.t0, args.t1, args.nt)
    except ValueError as exc:
        raise _Failure(EXIT_INPUT, f"bad grid: {exc}") from exc


def _params(args):
    return canonical_parameters(args.convention)


def cmd_validate(args) -> int:
    r = _load(args.path)
    rep = realization.validate(r)
    _emit(rep.to_dict(), args.out)
    status = "valid" if rep.ok else "invariant violation"
    print(f"validate: {status}, Lyapunov relative residual {rep.lyapunov_relative:.3e}, "
          f"min_sv(X0) {rep.x0_min_sv:.3e}", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_NUMERIC


def _field_names(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [n for n in names if n not in pde_verify.KNOWN_FIELDS]
    if not names or bad:
        raise _Failure(EXIT_INPUT, f"unknown field(s) {bad}; known: {', '.join(pde_verify.KNOWN_FIELDS)}")
    return names


def cmd_sample(args) -> int:
    names = _field_names(args.fields)
    r = _load(args.path)
    grid = _grid(args)
    fg = pde_verify.sample(r, grid, names, tol=args.tol, params=_params(args))
    text = pde_verify.to_csv(fg, names)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    masked = int(fg.mask.sum())
    print(f"sample: {grid.nx}x{grid.nt} cells, {masked} masked", file=sys.stderr)
    return EXIT_NUMERIC if masked == fg.mask.size else EXIT_OK


def _halved(grid):
    return pde_verify.GridSpec(grid.x0, grid.x1, 2 * grid.nx - 1, grid.t0, grid.t1, 2 * grid.nt - 1)


def cmd_residual(args) -> int:
    r = _load(args.path)
    grid = _grid(args)
    params = _params(args)
    fg = pde_verify.sample(r, grid, ("q",), tol=args.tol, params=params)
    pts = fg.unmasked_points()
    if not pts:
        raise _Failure(EXIT_NUMERIC, "every grid cell is masked")
    stride = max(1, len(pts) // LADDER_POINTS)
    pts = pts[::stride]
    notes = []
    fit = None
    if args.beta == "auto":
        try:
            fit = pde_verify.calibrate_beta(r, pts, params)
            beta = fit.beta
        except (DegenerateFit, TooFewPoints) as exc:
            beta = errata.FROZEN_BETA
            notes.append(f"calibration skipped ({exc}); using frozen beta {beta:.17g}")
    else:
        try:
            beta = float(args.beta)
        except ValueError:
            raise _Failure(EXIT_INPUT, f"--beta must be a number or 'auto', got {args.beta!r}") from None
    ladder = pde_verify.residual_ladder(r, pts, beta, params)
    reports = [ladder]
    try:
        fine = pde_verify.sample(r, _halved(grid), ("q",), tol=args.tol, params=params)
        reports.append(pde_verify.residual_fd(fg, beta, fine))
    except TooFewPoints as exc:
        notes.append(f"finite-difference residual skipped: {exc}")
    extra = {"notes": notes}
    if fit is not None:
        extra["calibration"] = {"beta": fit.beta, "fit_residual": fit.fit_residual, "points": fit.points}
    text = pde_verify.report_json(reports, extra)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    ok = ladder.max_residual <= LADDER_THRESHOLD
    print(f"residual: beta {beta:.12g}, ladder max {ladder.max_residual:.3e} "
          f"({'ok' if ok else 'above ' + format(LADDER_THRESHOLD, 'g')})", file=sys.stderr)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_soliton(args) -> int:
    try:
        sol = solitons.make(args.which, args.mu)
    except ValueError as exc:
        raise _Failure(EXIT_INPUT, str(exc)) from exc
    text = realization.dumps(sol.realization)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"soliton: {args.which} dataset, mu = {args.mu}", file=sys.stderr)
    return EXIT_OK


def cmd_random(args) -> int:
    gen = realization.random_symmetric if args.symmetric else realization.random_regular
    r = gen(args.n, args.seed, normalized=args.normalized)
    text = realization.dumps(r)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"random: n = {args.n}, seed = {args.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_scattering(args) -> int:
    r = _load(args.path)
    params = _params(args)
    lam = args.lam
    t = r.t0 if args.t is None else args.t
    S = scattering.transfer(propagate(r, args.x, t, params), lam).matrix
    ode = scattering.transfer_ode_residual(r, lam, args.x, args.h, t, params)
    bl = scattering.backlund_residual(r, lam, [args.x], t, params)
    fact = scattering.phi_star_factorization(r, lam, args.x, t, params)
    doc = {
        "lambda": [lam.real, lam.imag],
        "x": args.x,
        "t": t,
        "S": [[[z.real, z.imag] for z in row] for row in S],
        "transfer_ode_residual": ode,
        "backlund_output_lde": bl.output_lde,
        "backlund_third_order": bl.third_order,
        "input_third_order": bl.input_third_order,
        "phi_star_factorization": fact,
    }
    _emit(doc, args.out)
    ok = ode <= ODE_THRESHOLD and bl.output_lde <= BACKLUND_THRESHOLD and bl.third_order <= BACKLUND_THRESHOLD
    print(f"scattering: ODE residual {ode:.3e}, Backlund residual {bl.output_lde:.3e}",
          file=sys.stderr)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_atlas(args) -> int:
    r = _load(args.path)
    grid = _grid(args)
    fg = pde_verify.singular_scan(r, grid, args.tol, _params(args))
    text = pde_verify.to_csv(fg, ["min_sv"])
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"atlas: {int(fg.mask.sum())} flagged cells in {fg.components} component(s)",
          file=sys.stderr)
    return EXIT_OK


def cmd_errata(args) -> int:
    _emit(errata.report(), args.out)
    print("errata: report written", file=sys.stderr)
    return EXIT_OK


def _add_grid(p, nx=41, nt=21):
    p.add_argument("--x0", type=float, default=-2.0)
    p.add_argument("--x1", type=float, default=2.0)
    p.add_argument("--nx", type=int, default=nx)
    p.add_argument("--t0", type=float, default=-1.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--nt", type=int, default=nt)
    p.add_argument("--tol", type=float, default=pde_verify.DEFAULT_TOL,
                   help="singular-cell threshold on min_sv(X0^-1 X) (default 1e-8)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vessel-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--convention", choices=("compatible", "paper"), default="compatible",
                        help="sign of the (3,3) entry of gamma_t: compatible (-i, default) or paper (+i)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a realization file")
    p.add_argument("path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="sample fields on a grid and write CSV")
    p.add_argument("path")
    _add_grid(p)
    p.add_argument("--fields", default="q,tau")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("residual", help="Boussinesq residuals (ladder and finite difference)")
    p.add_argument("path")
    _add_grid(p)
    p.add_argument("--beta", default="auto", help="number or 'auto' (calibrate)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("soliton", help="write a built-in soliton realization")
    p.add_argument("--which", choices=("exp", "classic"), required=True)
    p.add_argument("--mu", type=parse_complex, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_soliton)

    p = sub.add_parser("random", help="write a random realization")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--symmetric", action="store_true")
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("scattering", help="transfer function and Backlund residuals")
    p.add_argument("path")
    p.add_argument("--lambda", dest="lam", type=parse_complex, required=True)
    p.add_argument("--x", type=float, default=0.0)
    p.add_argument("--t", type=float)
    p.add_argument("--h", type=float, default=1e-4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scattering)

    p = sub.add_parser("atlas", help="singular-set scan, min_sv field and mask as CSV")
    p.add_argument("path")
    _add_grid(p, nx=101, nt=51)
    p.add_argument("--out")
    p.set_defaults(func=cmd_atlas)

    p = sub.add_parser("errata", help="measured discrepancies of printed formulas")
    p.add_argument("--out")
    p.set_defaults(func=cmd_errata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OnSpectrum, SingularState) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VesselLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

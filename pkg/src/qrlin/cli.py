"""Command line front end: ``qrlin analyze|linearize|verify <spec.json>``.

Exit codes: 0 success, 1 a verify check failed, 2 unreadable spec,
3 numerical failure, 4 hypothesis failure, 5 divergence or domain escape.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .conjugacy import probe_disk, telescoping_defect
from .errors import ConvergenceError, DomainEscapeError, HypothesisError, QrlinError
from .estimates import _jsonable
from .lift import bip_integral, dtilde_inverse, lift_inverse, periodicity_defect
from .maps import HolomorphicSeries
from .oracles import RadialConjugacy, compare_full, oracle_for
from .pipeline import NumericalFailure, analyze, linearize, load_spec

EXIT_OK, EXIT_VERIFY, EXIT_PARSE, EXIT_NUMERIC, EXIT_HYPOTHESIS, EXIT_DIVERGE = range(6)


def _read_spec(path):
    try:
        with open(path) as fh:
            record = json.load(fh)
        return load_spec(record)
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise SystemExit(_fail(EXIT_PARSE, f"cannot read map spec {path}: {exc}"))


def _fail(code, message):
    print(f"qrlin: {message}", file=sys.stderr)
    return code


def _emit(payload, out_path):
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_analyze(args):
    fmap, _ = _read_spec(args.spec)
    try:
        payload = analyze(fmap, seed=args.seed)
    except NumericalFailure as exc:
        return _fail(EXIT_NUMERIC, str(exc))
    _emit(payload, args.out)
    return EXIT_OK


def _write_grid(path, result, radius):
    disk = probe_disk(radius)
    psi = np.asarray(result.psi(disk))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z_re", "z_im", "psi_re", "psi_im"])
        for z, p in zip(disk, psi):
            writer.writerow([repr(float(z.real)), repr(float(z.imag)),
                             repr(float(p.real)), repr(float(p.imag))])


def _run_linearize(fmap, rep_map, args):
    return linearize(fmap, rep_map=rep_map, mode=args.mode, tol=args.tol, k_max=args.kmax,
                     grid=args.grid, seed=args.seed)


def cmd_linearize(args):
    fmap, rep_map = _read_spec(args.spec)
    try:
        setup, result = _run_linearize(fmap, rep_map, args)
    except HypothesisError as exc:
        return _fail(EXIT_HYPOTHESIS, str(exc))
    except (DomainEscapeError, ConvergenceError) as exc:
        return _fail(EXIT_DIVERGE, f"{type(exc).__name__}: {exc}")
    except NumericalFailure as exc:
        if isinstance(exc.cause, (DomainEscapeError, ConvergenceError)) and \
                exc.operation in ("residual", "dilatation_decay"):
            return _fail(EXIT_DIVERGE, str(exc))
        return _fail(EXIT_NUMERIC, str(exc))
    ok = result.residual < args.residual_tol and (setup.report.threshold_ok or setup.report.bypass)
    payload = dict(
        seed=args.seed, mode=setup.mode, fixed_class=setup.fixed_class.tag,
        degree=setup.degree, working_radius=setup.radius, notes=setup.notes,
        hypotheses=setup.report.to_dict(), conjugacy=result.summary(), ok=ok,
        residual_tol=args.residual_tol, tol=args.tol)
    _emit(payload, args.out)
    if args.grid_csv:
        _write_grid(args.grid_csv, result, min(0.05, 0.5 * setup.radius))
    if not ok:
        return _fail(EXIT_DIVERGE, f"residual {result.residual:.3g} above {args.residual_tol:g}")
    return EXIT_OK


def _checks(fmap, setup, result, seed):
    """Yield ``(name, passed, detail)`` rows for the verify table."""
    rng = np.random.default_rng(seed)
    lo, hi = setup.window
    z = rng.uniform(lo, hi, 200) + 1j * rng.uniform(-np.pi, np.pi, 200)
    lift, sep, d = setup.lift, setup.sep, setup.degree

    per = max(periodicity_defect(lift, z, d), periodicity_defect(sep, z, d))
    yield "lift periodicity", per < 1e-9, f"{per:.2e}"
    ez = np.exp(z)
    conj = float(np.max(np.abs(np.exp(lift(z)) / fmap(ez) - 1)))
    yield "exp conjugation", conj < 1e-9, f"{conj:.2e}"
    w = np.asarray(sep(z))
    rt = float(np.max(np.abs(dtilde_inverse(sep, w) - z)))
    w = np.asarray(lift(z))
    rt = max(rt, float(np.max(np.abs(np.asarray(lift(lift_inverse(lift, w, sep=sep))) - w))))
    yield "inverse round trips", rt < 1e-10, f"{rt:.2e}"
    bip = [bip_integral(lift, t) for t in (hi, hi - 3, lo)]
    yield "BIP ladder bounded", all(np.isfinite(bip)), f"max {max(bip):.6g}"

    yield "conjugacy residual", result.residual < 1e-6, f"{result.residual:.2e}"
    psi_per = periodicity_defect(result.psi_tilde, z[:50], 1)
    yield "psi periodicity", psi_per < 1e-9, f"{psi_per:.2e}"
    tel = telescoping_defect(result, z[:50], result.k_used)
    yield "telescoping identity", tel < 1e-9, f"{tel:.2e}"
    disk = probe_disk(min(0.05, 0.5 * setup.radius), 6, 12)
    lz = np.log(disk)
    branch = float(np.max(np.abs(np.exp(result.psi_tilde(lz)) - np.exp(result.psi_tilde(lz + 2j * np.pi)))))
    yield "descend branch independence", branch < 1e-9 * float(np.max(np.abs(disk))) + 1e-15, f"{branch:.2e}"
    yield "error envelope", result.bound_check and result.first_step_check, \
        "checked" if result.bound_applicable else "exact representative"
    if setup.report.T1 == 0:
        ident = max(result.error_history)
        yield "identity conjugacy", ident < 1e-10, f"{ident:.2e}"
    if isinstance(fmap, HolomorphicSeries):
        phi, radial_mode = oracle_for(fmap, lift, setup.mode)
        H = RadialConjugacy(setup.profile, radial_mode)
        if setup.mode == "repelling":
            disk = disk[np.abs(fmap(disk)) < 0.9 * setup.radius]
        err = compare_full(result.psi(disk), phi(disk), H)
        limit = 1e-3 if setup.mode == "repelling" else 1e-4
        name = "Böttcher agreement" if radial_mode == "boettcher" else "Königs agreement"
        yield name, err < limit, f"{err:.2e}"


def cmd_verify(args):
    fmap, rep_map = _read_spec(args.spec)
    rows = []
    try:
        setup, result = linearize(fmap, rep_map=rep_map, seed=args.seed)
        rows.extend(_checks(fmap, setup, result, args.seed))
    except (QrlinError, ValueError, ArithmeticError) as exc:
        rows.append(("linearize", False, f"{type(exc).__name__}: {exc}"))
    width = max(len(r[0]) for r in rows)
    for name, passed, detail in rows:
        print(f"{'PASS' if passed else 'FAIL'}  {name.ljust(width)}  {detail}")
    return EXIT_OK if all(r[1] for r in rows) else EXIT_VERIFY


def build_parser():
    parser = argparse.ArgumentParser(prog="qrlin", description="Linearize planar quasiregular "
                                     "maps near a fixed point.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="classify the fixed point and measure structure")
    p.add_argument("spec")
    p.add_argument("-o", "--out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("linearize", help="build the conjugacy to the asymptotic representative")
    p.add_argument("spec")
    p.add_argument("-o", "--out")
    p.add_argument("--mode", choices=("auto", "attracting", "repelling"), default="auto")
    p.add_argument("--tol", type=float, default=1e-10, help="sup gap between iterates")
    p.add_argument("--residual-tol", type=float, default=1e-6,
                   help="relative conjugacy residual required for success")
    p.add_argument("--kmax", type=int, default=60)
    p.add_argument("--grid", type=int, default=33, help="probe lattice size per axis")
    p.add_argument("--grid-csv", help="write psi on a disk sample to this CSV")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_linearize)

    p = sub.add_parser("verify", help="run invariant checks and oracle comparisons")
    p.add_argument("spec")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

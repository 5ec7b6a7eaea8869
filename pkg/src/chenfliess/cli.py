"""Command line interface: ``chenfliess <command> [flags]``.

Exit codes: 0 success, 2 usage or input error, 3 numerical or horizon error,
4 resource cap.  Errors are written to stderr as a JSON object.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .catalog import builtin_series, factorial_geometric, fixed_input_member
from .exceptions import DegenerateDataError, HorizonError, NumericalError, ResourceCapError
from .ident import identify
from .operator import continuity_probe, evaluate_truncated, radius_check, scaled_perturbations
from .realization import DEFAULT_TERM_CAP, StateSpace, series_from_realization
from .series import Series
from .words import DEFAULT_WORD_CAP
from .signals import Signal, default_dt, parse_exponent
from .topology import (
    DEFAULT_TOL,
    ell_infty_M_norm,
    fit_growth_certificate,
    silva_convergence_check,
    verify_certificate,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CAP = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message, EXIT_USAGE)
        sys.exit(EXIT_USAGE)


def _emit_error(kind: str, message: str, code: int) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _write_json(obj, out: Optional[str]) -> None:
    text = json.dumps(_clean(obj), indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# -- argument helpers -------------------------------------------------------
def load_series(source: str) -> Series:
    """A Series JSON file, or a built-in such as ``factorial_geometric(2)``."""
    if os.path.isfile(source):
        return Series.from_json(Path(source).read_text())
    try:
        return builtin_series(source)
    except ValueError as exc:
        raise UsageError(f"{source!r} is neither a file nor a built-in series ({exc})") from None


_SIGNAL = re.compile(r"^\s*([a-z]+)\s*\(([^)]*)\)\s*$")


def _signal_function(text: str):
    match = _SIGNAL.match(text)
    if not match:
        raise UsageError(f"cannot parse signal {text!r}; use e.g. cos(10), sin(1), const(0.5), poly(1,0,2)")
    kind = match.group(1)
    args = [float(a) for a in match.group(2).split(",") if a.strip()]
    if kind in ("cos", "sin") and len(args) in (1, 2):
        w, a = args[0], (args[1] if len(args) == 2 else 1.0)
        f = np.cos if kind == "cos" else np.sin
        return lambda t: a * f(w * t)
    if kind == "const" and len(args) == 1:
        return lambda t: np.full_like(t, args[0])
    if kind == "poly" and args:
        return lambda t: np.polynomial.polynomial.polyval(t, args)
    raise UsageError(f"bad arguments for signal {text!r}")


def load_signal(source: str, T: Optional[float] = None, dt: Optional[float] = None) -> Signal:
    """A CSV file, or ``;``-separated built-in channels evaluated on ``[0, T]``."""
    if os.path.isfile(source):
        return Signal.from_csv(source)
    if T is None:
        raise UsageError("built-in signals need --T")
    funcs = [_signal_function(part) for part in source.split(";")]
    return Signal.from_functions(funcs, T, dt if dt else default_dt(T))


def parse_list(text: str, kind=float) -> List:
    """``"1,2,5"`` or an inclusive integer range ``"1..8"``."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return [kind(v) for v in range(int(lo), int(hi) + 1)]
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse list {text!r}") from None


def _sequence_from_dir(path: str) -> List[Series]:
    files = sorted(p for p in Path(path).iterdir() if p.suffix == ".json")
    if not files:
        raise UsageError(f"no .json series in {path}")
    return [Series.from_json(p.read_text()) for p in files]


# -- commands ---------------------------------------------------------------
def cmd_eval(args) -> int:
    c = load_series(args.series)
    u = load_signal(args.input, args.T, args.dt)
    res = evaluate_truncated(c, u, args.N, cap=args.max_words)
    if args.out:
        res.to_csv(args.out)
    summary = res.to_dict()
    summary["sup"] = float(np.max(np.abs(res.values)))
    _write_json(summary, None)
    return EXIT_OK


def cmd_norm(args) -> int:
    c = load_series(args.series)
    est = ell_infty_M_norm(c, args.M, None if c.is_finite else args.horizon)
    _write_json(est.to_dict(), args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    if args.sequence:
        seq = _sequence_from_dir(args.sequence)
        indices = list(range(1, len(seq) + 1))
    elif args.family:
        indices = parse_list(args.js, int)
        seq = [builtin_series(f"{args.family}({j})") for j in indices]
    else:
        raise UsageError("give --sequence DIR or --family NAME")
    limit = load_series(args.limit)
    rep = silva_convergence_check(seq, limit, parse_list(args.grid), args.horizon, args.tol, indices)
    _write_json(rep.to_dict(), args.out)
    return EXIT_OK


def cmd_gevrey(args) -> int:
    c = load_series(args.series)
    cert = fit_growth_certificate(c, args.horizon)
    d = cert.to_dict()
    d["verified_on_horizon"] = verify_certificate(c, cert, None if c.is_finite else args.horizon)
    d["locally_convergent"] = cert.locally_convergent
    _write_json(d, args.out)
    return EXIT_OK


def cmd_realize(args) -> int:
    sys_ = StateSpace.from_json(Path(args.system).read_text())
    c = series_from_realization(sys_, args.J, cap=args.max_terms)
    _write_json(c.to_dict(), args.out)
    return EXIT_OK


def cmd_identify(args) -> int:
    u = Signal.from_csv(args.u)
    y = Signal.from_csv(args.y)
    res = identify(u, y, args.J, lam=args.lam, delta=args.delta)
    _write_json(res.series.to_dict(), args.out)
    if args.residuals:
        res.residuals_to_csv(args.residuals)
    for note in res.warnings:
        sys.stderr.write(json.dumps({"warning": note}) + "\n")
    return EXIT_OK


def cmd_probe(args) -> int:
    c = load_series(args.series)
    u = load_signal(args.input, args.T, args.dt)
    if args.direction:
        w = load_signal(args.direction, u.T, u.dt)
    else:
        w = Signal(np.ones_like(u.samples), u.dt, u.t0)
    scales = parse_list(args.scales)
    rows = continuity_probe(c, u, scaled_perturbations(u, w, scales), args.p, args.N)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        wr = csv.writer(fh)
        wr.writerow(["scale", "input_dist", "output_dist"])
        for s, r in zip(scales, rows):
            wr.writerow([f"{s:.17g}", f"{r.input_dist:.17g}", f"{r.output_dist:.17g}"])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def fig1_data(Ma=1.0, Mb=7.0, omega=10.0, T=0.2 * math.pi, js=(1, 2, 5, 10, 100), dt=5e-5, N=50):
    """Outputs for the fixed-input example and their sup distances to the limit output."""
    u = Signal.from_functions([lambda t: np.cos(omega * t)], T, dt)
    limit = factorial_geometric(Mb)
    rc = radius_check(limit.certificate, u, limit.alphabet)
    y = evaluate_truncated(limit, u, N).values[0]
    E1 = np.sin(omega * u.times) / omega
    rows, curves = [], {}
    for j in js:
        member = fixed_input_member(j, Ma, Mb)
        yj = evaluate_truncated(member, u, N).values[0]
        Mj = Mb - (Mb - Ma) / j
        closed = 1.0 / (1.0 - Mj * E1) - 1.0 / (1.0 - Mb * E1)
        rows.append(
            {"j": j, "M_j": Mj, "sup_dist": float(np.max(np.abs(yj - y))),
             "closed_form_sup_dist": float(np.max(np.abs(closed)))}
        )
        curves[j] = yj
    return {"u": u, "y": y, "curves": curves, "rows": rows, "radius": rc}


def cmd_repro_fig1(args) -> int:
    js = parse_list(args.js, int)
    data = fig1_data(args.Ma, args.Mb, args.omega, args.T, js, args.dt, args.N)
    u, rc = data["u"], data["radius"]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "fig1_trajectories.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "y"] + [f"y_{j}" for j in js])
        cols = [data["y"]] + [data["curves"][j] for j in js]
        for i, t in enumerate(u.times):
            w.writerow([f"{t:.17g}"] + [f"{col[i]:.17g}" for col in cols])
    with open(out_dir / "fig1_table.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "M_j", "sup_dist", "closed_form_sup_dist"])
        for r in data["rows"]:
            w.writerow([r["j"], f"{r['M_j']:.17g}", f"{r['sup_dist']:.17g}", f"{r['closed_form_sup_dist']:.17g}"])
    _write_json(
        {
            "u_l1": rc.u_l1,
            "T": rc.T,
            "threshold": rc.threshold,
            "radius_ok": rc.ok,
            "N": args.N,
            "dt": u.dt,
            "table": data["rows"],
        },
        None,
    )
    return EXIT_OK


# -- parser -----------------------------------------------------------------
def _signal_flags(p, required=True):
    p.add_argument("--input", required=required, help="signal CSV (t,u1..um) or built-in like 'cos(10)'; ';' separates channels")
    p.add_argument("--T", type=float, help="horizon for built-in signals")
    p.add_argument("--dt", type=float, help="grid step for built-in signals (default T/1000)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chenfliess", description="Chen-Fliess series: evaluation, norms, realization and identification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate a truncated Chen-Fliess operator")
    p.add_argument("--series", required=True, help="series JSON or built-in name, e.g. 'factorial_geometric(2)'")
    _signal_flags(p)
    p.add_argument("--N", type=int, help="truncation length (default: certified choice or polynomial degree)")
    p.add_argument("--out", help="output CSV; a .json sidecar is written next to it")
    p.add_argument("--max-words", type=int, default=DEFAULT_WORD_CAP, help="refuse truncations with more words than this")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("norm", help="weighted sup-norm of a series")
    p.add_argument("--series", required=True, help="series JSON or built-in name")
    p.add_argument("--M", type=float, required=True, help="weight M > 0")
    p.add_argument("--horizon", type=int, help="longest word length scanned for generated series")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("converge", help="look for an M at which a sequence converges")
    p.add_argument("--sequence", help="directory of series JSON files, taken in sorted name order")
    p.add_argument("--family", help="built-in family indexed by j, e.g. banach_example")
    p.add_argument("--js", default="1..10", help="indices for --family, e.g. '1..10' or '1,2,5'")
    p.add_argument("--limit", required=True, help="limit series JSON or built-in name")
    p.add_argument("--grid", default="1..8", help="M grid, e.g. '1..8' or '0.5,1,2'")
    p.add_argument("--horizon", type=int, help="scan horizon for generated series")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="convergence tolerance")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("gevrey", help="fit a heuristic growth certificate")
    p.add_argument("--series", required=True, help="series JSON or built-in name")
    p.add_argument("--horizon", type=int, help="longest word length used in the fit")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_gevrey)

    p = sub.add_parser("realize", help="generating series of a polynomial state-space system")
    p.add_argument("--system", required=True, help="state-space JSON")
    p.add_argument("--J", type=int, required=True, help="longest word length")
    p.add_argument("--out", help="write series JSON here instead of stdout")
    p.add_argument("--max-terms", type=int, default=DEFAULT_TERM_CAP, help="refuse Lie derivatives with more terms than this")
    p.set_defaults(func=cmd_realize)

    p = sub.add_parser("identify", help="recursive least-squares identification from data")
    p.add_argument("--u", required=True, help="input CSV")
    p.add_argument("--y", required=True, help="output CSV on the same grid")
    p.add_argument("--J", type=int, required=True, help="longest word length in the basis")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="forgetting factor in (0, 1]")
    p.add_argument("--delta", type=float, default=1e3, help="initial covariance scale")
    p.add_argument("--out", help="write series JSON here instead of stdout")
    p.add_argument("--residuals", help="residual history CSV")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("probe", help="empirical continuity table for scaled input perturbations")
    p.add_argument("--series", required=True, help="series JSON or built-in name")
    _signal_flags(p)
    p.add_argument("--direction", help="perturbation direction (signal CSV or built-in); default all ones")
    p.add_argument("--scales", default="1e-1,1e-2,1e-3,1e-4", help="comma-separated perturbation sizes")
    p.add_argument("--p", type=parse_exponent, default=2.0, help="input norm exponent; outputs use the conjugate")
    p.add_argument("--N", type=int, help="truncation length")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("repro-fig1", help="fixed-input convergence example: trajectories and sup distances")
    p.add_argument("--Ma", type=float, default=1.0)
    p.add_argument("--Mb", type=float, default=7.0)
    p.add_argument("--omega", type=float, default=10.0)
    p.add_argument("--T", type=float, default=0.2 * math.pi)
    p.add_argument("--js", default="1,2,5,10,100")
    p.add_argument("--dt", type=float, default=5e-5)
    p.add_argument("--N", type=int, default=50)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_repro_fig1)
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, ResourceCapError):
        return EXIT_CAP
    if isinstance(exc, (HorizonError, NumericalError, DegenerateDataError)):
        return EXIT_NUMERIC
    return EXIT_USAGE


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ResourceCapError, HorizonError, NumericalError, DegenerateDataError,
            UsageError, ValueError, KeyError, OSError) as exc:
        code = _exit_code(exc)
        _emit_error(type(exc).__name__, str(exc), code)
        return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

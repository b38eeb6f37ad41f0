"""Command-line entry point: ``emtrloc simulate|precompute|locate|sweep``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import warnings

from . import emtr, solver, store
from .netmodel import FaultSpec, NetworkError, load_network, make_guess_grid, position_of
from .signals import extract_fraction, read_trace_csv, write_trace_csv

DEFAULT_DT = 1e-7
DEFAULT_WINDOW = 5e-3

_SUFFIX = {
    "ns": 1e-9, "us": 1e-6, "µs": 1e-6, "ms": 1e-3, "s": 1.0,
    "km": 1e3, "m": 1.0, "k": 1e3, "M": 1e6, "ohm": 1.0, "kohm": 1e3,
}
_NUM = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ]*)\s*$")


def si(text: str) -> float:
    """Parse a number with an optional SI suffix: ``0.1us``, ``5ms``, ``8km``, ``100k``."""
    m = _NUM.match(text)
    if not m or m.group(2) not in ("", *_SUFFIX):
        raise argparse.ArgumentTypeError(f"not a number with a known unit suffix: {text!r}")
    return float(m.group(1)) * _SUFFIX.get(m.group(2), 1.0)


def si_list(text: str) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise argparse.ArgumentTypeError("empty sweep list")
    return items


class CLIError(Exception):
    pass


def _echo_config(args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("config: " + json.dumps(cfg, sort_keys=True, default=str), file=sys.stderr)


def _window_samples(args) -> int:
    return int(round(args.window / args.dt))


def _excitation(args, kind: str, n: int, dt: float):
    if kind == "impulse":
        params = {"alpha_s": args.alpha, "beta_s": args.beta}
    elif kind == "ac":
        params = {"hz": args.hz}
    elif kind == "noise":
        params = {"seed": args.seed}
    else:
        raise CLIError(f"unknown excitation {kind!r} (impulse, ac, noise)")
    return emtr.excitation(kind, n, dt, **params)


def cmd_simulate(args) -> None:
    net = load_network(args.network)
    pos = position_of(args.fault)
    fault = FaultSpec(pos.segment_id, pos.distance_m, args.fault_ohms)
    net.check_position(fault)
    u0 = solver.simulate_fault_transient(net, fault, args.dt, args.window, args.fault_angle)
    write_trace_csv(u0, args.out)
    speed = min(s.params.wave_speed for s in net.segments)
    d = net.path_length_to(fault.position)
    print(f"wrote {len(u0)} samples at dt={args.dt:g} s to {args.out}")
    print(f"fault {fault.position}: first arrival {d / speed * 1e6:.3f} us, echo spacing {2 * d / speed * 1e6:.3f} us")


def cmd_precompute(args) -> None:
    net = load_network(args.network)
    grid = make_guess_grid(net, args.spacing)
    u, desc = _excitation(args, args.excitation, _window_samples(args), args.dt)
    db = emtr.precompute_db(net, grid, u, args.source_ohms, desc)
    store.save_db(db, args.out)
    print(f"wrote {len(db)} traces x {db.n_samples} samples to {args.out}")


def _trace(args):
    u0 = read_trace_csv(args.trace)
    if args.fraction_start is not None or args.fraction_length is not None:
        start = u0.t0 if args.fraction_start is None else args.fraction_start
        length = (u0.t0 + u0.duration - start) if args.fraction_length is None else args.fraction_length
        u0 = extract_fraction(u0, start, length)
    return u0


def _report(label: str, res: emtr.LocationResult) -> None:
    e = res.energy_curve.energies[res.energy_curve.positions.index(res.located)]
    prefix = f"{label}: " if label else ""
    print(f"{prefix}located {res.located} energy={e:.6g} contrast_ratio={res.contrast_ratio:.6g}")


def _locate(args, u0, method: str, db=None) -> emtr.LocationResult:
    if method == "convolution":
        if db is None:
            raise CLIError("--method convolution requires --db")
        fp = load_network(args.network).fingerprint() if args.network else None
        return emtr.locate_convolution(db, u0, fp)
    if not args.network:
        raise CLIError(f"--method {method} requires --network")
    net = load_network(args.network)
    grid = make_guess_grid(net, args.spacing)
    fgrid = emtr.energy_grid(u0.dt, len(u0), args.horizon)
    fn = emtr.locate_classic if method == "classic" else emtr.locate_direct
    return fn(net, u0, grid, fgrid, args.source_ohms)


def cmd_locate(args) -> None:
    u0 = _trace(args)
    db = store.load_db(args.db) if args.db else None
    res = _locate(args, u0, args.method, db)
    if args.out:
        res.energy_curve.write_csv(args.out)
    _report("", res)


def cmd_sweep(args) -> None:
    u0_full = read_trace_csv(args.trace)
    curves = []
    if args.kind in ("lengths", "starts"):
        if not args.db:
            raise CLIError(f"--kind {args.kind} requires --db")
        db = store.load_db(args.db)
        for v in args.values:
            x = si(v)
            if args.kind == "lengths":
                frac = extract_fraction(u0_full, u0_full.t0, x)
            else:
                if args.fraction_length is None:
                    raise CLIError("--kind starts requires --fraction-length")
                frac = extract_fraction(u0_full, x, args.fraction_length)
            curves.append((v, emtr.locate_convolution(db, frac)))
    else:
        if not args.network:
            raise CLIError("--kind excitations requires --network")
        net = load_network(args.network)
        grid = make_guess_grid(net, args.spacing)
        n = int(round(args.window / u0_full.dt))
        for kind in args.values:
            u, desc = _excitation(args, kind, n, u0_full.dt)
            db = emtr.precompute_db(net, grid, u, args.source_ohms, desc)
            curves.append((kind, emtr.locate_convolution(db, u0_full, net.fingerprint())))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "segment", "distance_m", "energy", "normalized"])
        for label, res in curves:
            for seg, d, e, nrm in res.energy_curve.rows():
                w.writerow([label, seg, repr(d), repr(e), repr(nrm)])
    for label, res in curves:
        _report(label, res)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="emtrloc", description="EMTR fault location on line networks")
    sub = ap.add_subparsers(dest="command", required=True)

    def shared(p, network_required=True):
        p.add_argument("--network", required=network_required, help="network description file")
        p.add_argument("--dt", type=si, default=DEFAULT_DT, help="sample step (default 0.1us)")
        p.add_argument("--window", type=si, default=DEFAULT_WINDOW, help="signal window (default 5ms)")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--source-ohms", type=si, default=None,
                       help="reverse-injection source impedance (default: port termination)")

    def excitation_flags(p):
        p.add_argument("--alpha", type=si, default=20e-6, help="impulse tail constant (20us)")
        p.add_argument("--beta", type=si, default=3e-6, help="impulse front constant (3us)")
        p.add_argument("--hz", type=si, default=50.0, help="AC excitation frequency (50)")
        p.add_argument("--seed", type=int, default=0, help="noise excitation seed")

    p = sub.add_parser("simulate", help="simulate the port transient of a fault")
    shared(p)
    p.add_argument("--fault", required=True, help="fault position key, e.g. T1@4000")
    p.add_argument("--fault-ohms", type=si, default=0.0, help="fault impedance (0 = ideal short)")
    p.add_argument("--fault-angle", type=float, default=0.0,
                   help="phase of the pre-fault voltage at fault inception, rad (0 = peak)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("precompute", help="precompute the transient database")
    shared(p)
    p.add_argument("--spacing", type=si, required=True, help="guess grid spacing, e.g. 500m")
    p.add_argument("--excitation", default="impulse", choices=["impulse", "ac", "noise"])
    excitation_flags(p)
    p.set_defaults(func=cmd_precompute)

    p = sub.add_parser("locate", help="locate a fault from a captured port trace")
    shared(p, network_required=False)
    p.add_argument("--method", required=True, choices=["classic", "direct", "convolution"])
    p.add_argument("--trace", required=True, help="CSV trace t_s,value")
    p.add_argument("--db", help="transient database (convolution method)")
    p.add_argument("--spacing", type=si, default=500.0, help="guess grid spacing (classic/direct)")
    p.add_argument("--horizon", type=si, default=emtr.DEFAULT_HORIZON_S,
                   help="energy integration horizon (classic/direct)")
    p.add_argument("--fraction-start", type=si, default=None)
    p.add_argument("--fraction-length", type=si, default=None)
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("sweep", help="one energy curve per signal length, start time or excitation")
    shared(p, network_required=False)
    p.add_argument("--kind", required=True, choices=["lengths", "starts", "excitations"])
    p.add_argument("--values", type=si_list, required=True,
                   help="comma list: lengths/starts with units, or excitation kinds")
    p.add_argument("--trace", required=True)
    p.add_argument("--db")
    p.add_argument("--spacing", type=si, default=500.0)
    p.add_argument("--fraction-length", type=si, default=None)
    excitation_flags(p)
    p.set_defaults(func=cmd_sweep)
    return ap


def _showwarning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _echo_config(args)
    previous = warnings.showwarning
    warnings.showwarning = _showwarning
    try:
        args.func(args)
    except FileNotFoundError as exc:
        print(f"error: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (CLIError, NetworkError, store.DBFormatError, solver.SolverError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        warnings.showwarning = previous
    return 0


if __name__ == "__main__":
    sys.exit(main())

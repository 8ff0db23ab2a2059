"""Command-line front end.

Exit codes: 0 success, 1 computation or verification failure, 2 usage or
validation error.  All quantities use hbar = 2m = 1.
"""
from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import checks, floquet
from .core import BarrierSystem, kinematics
from .errors import EnergyOutOfRange, NotAtResonance, TunnelingError
from .oracle import exact_peak_positions, from_double_barrier, transmission_probability
from .output import csv_text, format_value, json_text, records_text
from .pathsum import (
    find_resonances,
    odd_resonance_residual,
    resonance_parity,
    resonance_residual,
    transmission,
)
from .prescriptions import prescription_for

SWEEP_HEADER = ["E", "k", "q", "theta", "L", "T2_semiclassical", "regime", "T2_exact", "abs_err"]
RESONANCE_HEADER = ["E_semiclassical", "parity", "residual", "E_exact", "abs_dE"]
SIDEBAND_HEADER = ["n", "J_n", "probability"]
PRESCRIPTIONS = ("eltschka", "aoyama-harano", "wkb")


class UsageError(Exception):
    """Bad or missing input; maps to exit code 2."""


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------

def _shared_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("system")
    g.add_argument("--v0", type=float, help="barrier height V0")
    g.add_argument("--w", type=float, help="barrier width")
    g.add_argument("--d", type=float, help="well width")
    g.add_argument("--prescription", choices=PRESCRIPTIONS)
    g.add_argument("--compare-exact", action="store_true", default=None)
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--output", metavar="PATH", help="write to PATH instead of stdout")
    g.add_argument("--config", metavar="PATH", help="flat 'key = value' file; flags override it")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_parser()
    parser = argparse.ArgumentParser(prog="dbtunnel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transmit", parents=[shared], help="transmission at one energy")
    p.add_argument("--energy", type=float)

    p = sub.add_parser("sweep", parents=[shared], help="transmission over an energy grid")
    p.add_argument("--e-min", type=float)
    p.add_argument("--e-max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--workers", type=int)

    p = sub.add_parser("resonances", parents=[shared], help="resonance energies in a range")
    p.add_argument("--e-min", type=float)
    p.add_argument("--e-max", type=float)
    p.add_argument("--grid", type=int)

    p = sub.add_parser("sidebands", parents=[shared], help="sideband spectrum of a driven well")
    p.add_argument("--energy", type=float)
    p.add_argument("--v1", type=float, help="modulation amplitude V1")
    p.add_argument("--omega", type=float, help="modulation quantum hbar*omega")
    p.add_argument("--f-max", type=float, help="upper end of the quench-point scan")
    p.add_argument("--n-max", type=int, help="highest sideband order listed")
    p.add_argument("--resonance-tol", type=float)

    p = sub.add_parser("verify", parents=[shared], help="run the self-check suite")
    p.add_argument("--json", action="store_true", default=None, help="machine-readable report")
    p.add_argument("--seed", type=int)
    return parser


DEFAULTS = {
    "prescription": "eltschka",
    "compare_exact": False,
    "format": "csv",
    "points": 101,
    "workers": 1,
    "grid": 2001,
    "f_max": 5.0,
    "resonance_tol": 1e-8,
    "json": False,
    "seed": checks.DEFAULT_SEED,
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"config: cannot read {path}: {exc.strerror}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config {path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _coerce(parser_types, key, value):
    if key not in parser_types:
        raise UsageError(f"config: unknown key {key!r}")
    kind = parser_types[key]
    if kind is bool:
        low = value.lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise UsageError(f"config: {key} expects a boolean, got {value!r}")
    try:
        return kind(value)
    except ValueError:
        raise UsageError(f"config: {key} expects {kind.__name__}, got {value!r}") from None


def resolve_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    types = {}
    for action in sub._actions:
        if action.dest in ("help", "config"):
            continue
        if isinstance(action, argparse._StoreTrueAction):
            types[action.dest] = bool
        else:
            types[action.dest] = action.type or str
    merged = dict(DEFAULTS)
    if args.config:
        for key, value in read_config(args.config).items():
            merged[key] = _coerce(types, key, value)
    for key, value in vars(args).items():
        if value is not None:
            merged[key] = value
    for key in types:
        merged.setdefault(key, None)
    if merged.get("prescription") not in PRESCRIPTIONS:
        raise UsageError(f"prescription must be one of {', '.join(PRESCRIPTIONS)}")
    if merged.get("format") not in ("csv", "json"):
        raise UsageError("format must be csv or json")
    return argparse.Namespace(**merged)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required --{name.replace('_', '-')}")


def _system(args) -> BarrierSystem:
    _require(args, "v0", "w", "d")
    for name in ("v0", "w", "d"):
        value = getattr(args, name)
        if not (math.isfinite(value) and value > 0):
            raise UsageError(f"--{name} must be a positive finite number, got {value}")
    return BarrierSystem(args.v0, args.w, args.d)


def _check_energy(system, e, name="energy"):
    if not (math.isfinite(e) and 0 < e < system.v0):
        raise UsageError(f"--{name} = {e} is outside the tunneling range 0 < E < V0 = {system.v0}")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def transmission_row(system: BarrierSystem, e: float, prescription: str, compare_exact: bool) -> dict:
    state = kinematics(system, e)
    result = transmission(system, e, prescription)
    row = {
        "E": e, "k": state.k, "q": state.q, "theta": state.theta, "L": state.l_phase,
        "T2_semiclassical": result.probability, "regime": result.regime.value,
        "T2_exact": None, "abs_err": None,
    }
    if compare_exact:
        exact = transmission_probability(from_double_barrier(system), e)
        row["T2_exact"] = exact
        row["abs_err"] = abs(result.probability - exact)
    return row


def _row_task(task):
    v0, w, d, e, prescription, compare_exact = task
    return transmission_row(BarrierSystem(v0, w, d), e, prescription, compare_exact)


def cmd_transmit(args) -> str:
    system = _system(args)
    _require(args, "energy")
    _check_energy(system, args.energy)
    row = transmission_row(system, args.energy, args.prescription, args.compare_exact)
    return records_text(SWEEP_HEADER, [row], args.format)


def sweep_rows(system, e_min, e_max, points, prescription, compare_exact, workers=1):
    energies = [float(e) for e in np.linspace(e_min, e_max, points)]
    tasks = [(system.v0, system.w, system.d, e, prescription, compare_exact) for e in energies]
    if workers <= 1:
        return [_row_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order
        return list(pool.map(_row_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def cmd_sweep(args) -> str:
    system = _system(args)
    _require(args, "e_min", "e_max")
    _check_energy(system, args.e_min, "e-min")
    _check_energy(system, args.e_max, "e-max")
    if not args.e_min < args.e_max:
        raise UsageError("--e-min must be smaller than --e-max")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    rows = sweep_rows(system, args.e_min, args.e_max, args.points, args.prescription,
                      args.compare_exact, args.workers)
    return records_text(SWEEP_HEADER, rows, args.format)


def resonance_rows(system, e_min, e_max, prescription, compare_exact, grid_n=2001):
    roots = find_resonances(system, prescription, e_min, e_max, grid_n)
    rows = []
    for e in roots:
        state = kinematics(system, e)
        p = prescription_for(prescription, state)
        parity = resonance_parity(state, p)
        residual = resonance_residual(state, p) if parity == "even" else odd_resonance_residual(state, p)
        rows.append({"E_semiclassical": e, "parity": parity, "residual": residual,
                     "E_exact": None, "abs_dE": None})
    if compare_exact:
        peaks = exact_peak_positions(from_double_barrier(system), e_min, e_max, max(grid_n, 16))
        unmatched = list(peaks)
        for row in rows:
            if not unmatched:
                break
            nearest = min(unmatched, key=lambda x: abs(x - row["E_semiclassical"]))
            unmatched.remove(nearest)
            row["E_exact"] = nearest
            row["abs_dE"] = abs(nearest - row["E_semiclassical"])
        for peak in unmatched:
            rows.append({"E_semiclassical": None, "parity": None, "residual": None,
                         "E_exact": peak, "abs_dE": None})
        rows.sort(key=lambda r: r["E_semiclassical"] if r["E_semiclassical"] is not None else r["E_exact"])
    return rows


def cmd_resonances(args) -> str:
    system = _system(args)
    e_min = args.e_min if args.e_min is not None else 0.01 * system.v0
    e_max = args.e_max if args.e_max is not None else 0.99 * system.v0
    _check_energy(system, e_min, "e-min")
    _check_energy(system, e_max, "e-max")
    if not e_min < e_max:
        raise UsageError("--e-min must be smaller than --e-max")
    rows = resonance_rows(system, e_min, e_max, args.prescription, args.compare_exact, args.grid)
    return records_text(RESONANCE_HEADER, rows, args.format)


def sideband_report(system, e, drive, n_max=None, f_max=5.0, resonance_tol=1e-8):
    state = kinematics(system, e)
    p = prescription_for("eltschka", state)
    residual = min(resonance_residual(state, p), odd_resonance_residual(state, p), key=abs)
    if abs(residual) >= resonance_tol:
        raise NotAtResonance(f"energy {e} is not at a resonance: residual = {residual:.6e} "
                             f"(tolerance {resonance_tol:g})")
    spectrum = floquet.sideband_spectrum(state, drive, n_max)
    rows = [{"n": n, "J_n": a, "probability": spectrum.probabilities[n]}
            for n, a in sorted(spectrum.amplitudes.items()) if a != 0.0]
    quench = floquet.quench_points(state, 0, f_max)
    return {"gamma": spectrum.gamma, "f": spectrum.f, "residual": residual,
            "sidebands": rows, "quench_points": quench}


def cmd_sidebands(args) -> str:
    system = _system(args)
    _require(args, "energy", "v1", "omega")
    _check_energy(system, args.energy)
    if not args.omega > 0:
        raise UsageError("--omega must be positive")
    if not args.v1 >= 0:
        raise UsageError("--v1 must be non-negative")
    if args.n_max is not None and args.n_max < 0:
        raise UsageError("--n-max must be non-negative")
    if not args.f_max > 0:
        raise UsageError("--f-max must be positive")
    drive = floquet.DriveParameters(args.v1, args.omega)
    try:
        report = sideband_report(system, args.energy, drive, args.n_max, args.f_max, args.resonance_tol)
    except NotAtResonance as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        return json_text(report)
    parts = [
        csv_text(["gamma", "f"], [{"gamma": report["gamma"], "f": report["f"]}]),
        csv_text(SIDEBAND_HEADER, report["sidebands"]),
        csv_text(["quench_n", "quench_f"], [{"quench_n": 0, "quench_f": f} for f in report["quench_points"]]),
    ]
    return "\n".join(parts)


def cmd_verify(args) -> tuple[str, bool]:
    if any(getattr(args, k) is not None for k in ("v0", "w", "d")):
        system = _system(args)
    else:
        system = BarrierSystem(2.0, 2.0, math.pi / 2)
    results = checks.run_checks(system, args.seed)
    ok = all(r.ok for r in results)
    if args.json or args.format == "json":
        text = json_text({
            "passed": ok,
            "checks": [{"name": r.name, "status": r.status, "measured": r.measured,
                        "tolerance": r.tolerance, "detail": r.detail} for r in results],
        })
    else:
        width = max(len(r.name) for r in results)
        lines = [f"{r.status:<4}  {r.name:<{width}}  measured={format_value(float(r.measured))}"
                 f"  tol={float(r.tolerance):g}" + (f"  {r.detail}" if r.detail else "")
                 for r in results]
        lines.append(f"{'ALL PASS' if ok else 'FAILED'}")
        text = "\n".join(lines) + "\n"
    return text, ok


COMMANDS = {
    "transmit": cmd_transmit,
    "sweep": cmd_sweep,
    "resonances": cmd_resonances,
    "sidebands": cmd_sidebands,
}


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        args = resolve_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"dbtunnel: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "verify":
            text, ok = cmd_verify(args)
            status = 0 if ok else 1
        else:
            text = COMMANDS[args.command](args)
            status = 0
        _emit(text, args.output)
        return status
    except (UsageError, EnergyOutOfRange) as exc:
        print(f"dbtunnel: error: {exc}", file=sys.stderr)
        return 2
    except (TunnelingError, ArithmeticError, ValueError, OSError) as exc:
        print(f"dbtunnel: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

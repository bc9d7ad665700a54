"""Command-line front end: each subcommand emits CSV data plus a JSON manifest.

Subcommands: overlap, husimi, fidelity, lyapunov, metrics.  All outputs are
deterministic (no randomness anywhere), CSV is RFC-4180 style with 17
significant digits, and every run writes a manifest sufficient to reproduce it
exactly.  Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .coherent import NATURAL_SCALE
from .dynamics import (
    DrivenQuartic,
    HarmonicSpec,
    MorseSystem,
    PhaseState,
    evolve_driven_quartic,
    lyapunov_from_overlap,
    lyapunov_short_time,
    sample_harmonic,
    twin_separation,
)
from .husimi import (
    HusimiField,
    harmonic_level_energy,
    ho_husimi_field,
    morse_eigenstate,
    morse_eigenvalue,
    morse_husimi,
    normalize_unit,
    sc_husimi,
    write_field_csv,
)
from .metrics import delta_q, sq, write_profile_csv, write_sq_csv
from .numkit import Grid1D, OdeBlowupError, QuadratureError
from .semiclassical import gaussian_decay_fit, PerturbationSpec, sc_fidelity_numeric, sc_overlap
from .husimi import TruncationError

__all__ = ["main", "RunManifest"]


@dataclass
class RunManifest:
    """Provenance record written next to every data file set."""

    command: str
    parameters: dict
    outputs: list[str] = dc_field(default_factory=list)
    results: dict = dc_field(default_factory=dict)
    version: str = __version__
    deterministic: bool = True

    def write(self, path: Path) -> str:
        payload = {
            "command": self.command,
            "parameters": self.parameters,
            "outputs": self.outputs,
            "results": self.results,
            "version": self.version,
            "deterministic": self.deterministic,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
        return str(path)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" for v in row])
    return str(path)


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"{flag} expects 'a,b', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_floats(text: str, flag: str) -> list[float]:
    values = [float(p) for p in text.split(",") if p.strip() != ""]
    if not values:
        raise ValueError(f"{flag} expects a nonempty comma-separated list")
    return values


def _parse_ints(text: str, flag: str) -> list[int]:
    return [int(v) for v in _parse_floats(text, flag)]


def _with_tag(out: Path, tag: str) -> Path:
    return out.with_name(out.stem + tag + out.suffix)


# ---------------------------------------------------------------------------
# overlap
# ---------------------------------------------------------------------------


def _cmd_overlap(args: argparse.Namespace) -> int:
    omegas = _parse_floats(args.omega, "--omega")
    ic = _parse_pair(args.ic, "--ic")
    ic2 = _parse_pair(args.ic2, "--ic2")
    out = Path(args.out)
    manifest = RunManifest(
        command="overlap",
        parameters={
            "omega": omegas,
            "gamma": args.gamma,
            "ic": list(ic),
            "ic2": list(ic2),
            "tmax": args.tmax,
            "dt": args.dt,
            "out": str(out),
        },
    )
    for omega in omegas:
        system = DrivenQuartic(gamma_d=args.gamma, omega_d=omega)
        traj_a = evolve_driven_quartic(PhaseState(0.0, ic[0], ic[1]), system, args.tmax, args.dt)
        traj_b = evolve_driven_quartic(PhaseState(0.0, ic2[0], ic2[1]), system, args.tmax, args.dt)
        series = sc_overlap(traj_a, traj_b, NATURAL_SCALE)
        path = _with_tag(out, f"_omega{omega:g}") if len(omegas) > 1 else out
        manifest.outputs.append(
            _write_csv(path, ["t", "overlap"], zip(series.t, series.values))
        )
    manifest.write(_with_tag(out, "_manifest").with_suffix(".json"))
    return 0


# ---------------------------------------------------------------------------
# husimi
# ---------------------------------------------------------------------------

# Plot-axis mappings for the Morse fields of the two lowest levels: the axis
# coordinate x maps to r = r0 (x + x_off) / x_div and y to
# p = mu w r0 (y - y_off) / y_div.
_MORSE_AXIS_MAPS = {
    0: {"x_off": 10.0, "x_div": 250.0, "y_off": 2.0, "y_div": 1.2,
        "x_range": (0.0, 250.0), "y_range": (0.0, 4.0)},
    1: {"x_off": 300.0, "x_div": 1000.0, "y_off": 5.0, "y_div": 5.0,
        "x_range": (0.0, 1000.0), "y_range": (0.0, 10.0)},
}


def _morse_default_grids(n: int, system: MorseSystem, qn: int, pn: int) -> tuple[Grid1D, Grid1D, dict]:
    sig2 = system.sigma2
    if n in _MORSE_AXIS_MAPS:
        m = _MORSE_AXIS_MAPS[n]
        u_lo = (m["x_range"][0] + m["x_off"]) / m["x_div"]
        u_hi = (m["x_range"][1] + m["x_off"]) / m["x_div"]
        p_lo = (m["y_range"][0] - m["y_off"]) * sig2 / m["y_div"]
        p_hi = (m["y_range"][1] - m["y_off"]) * sig2 / m["y_div"]
        return Grid1D(u_lo, u_hi, qn), Grid1D(p_lo, p_hi, pn), {"axis_map": m}
    # generic: pad the classical orbit by several coherent widths
    from .dynamics import morse_orbit

    u, ptil = morse_orbit(morse_eigenvalue(n, system), system, 512)
    pad_u = 6.0 / math.sqrt(sig2)
    pad_p = 6.0 * math.sqrt(sig2)
    qgrid = Grid1D(max(1e-3, u.min() - pad_u), u.max() + pad_u, qn)
    phalf = max(abs(ptil).max() + pad_p, pad_p)
    pgrid = Grid1D(-phalf, phalf, pn)
    return qgrid, pgrid, {"axis_map": None}


def _morse_exact_field(state, qgrid: Grid1D, pgrid: Grid1D) -> HusimiField:
    qpts = qgrid.points()
    ppts = pgrid.points()
    values = np.zeros((qgrid.n, pgrid.n))
    for i, u in enumerate(qpts):
        cache: dict[float, float] = {}
        for j, pt in enumerate(ppts):
            key = round(abs(pt), 12)  # H(u, p) = H(u, -p) for real radial states
            if key not in cache:
                cache[key] = morse_husimi(state, float(u), float(abs(pt)))
            values[i, j] = cache[key]
    raw = HusimiField(qgrid, pgrid, values, "raw", meta={"kind": "morse-exact", "nu": state.nu})
    return normalize_unit(raw)


def _cmd_husimi(args: argparse.Namespace) -> int:
    out = Path(args.out)
    n = args.n
    qn = args.qn if args.qn is not None else (161 if args.system == "harmonic" else 32)
    pn = args.pn if args.pn is not None else (161 if args.system == "harmonic" else 81)
    manifest = RunManifest(
        command="husimi",
        parameters={
            "system": args.system,
            "n": n,
            "mode": args.mode,
            "qlo": args.qlo,
            "qhi": args.qhi,
            "qn": qn,
            "plo": args.plo,
            "phi": args.phi,
            "pn": pn,
            "period_samples": args.period_samples,
            "out": str(out),
        },
    )

    if args.system == "harmonic":
        span = math.sqrt(2.0 * n) + 6.0
        qgrid = Grid1D(args.qlo if args.qlo is not None else -span,
                       args.qhi if args.qhi is not None else span, qn)
        pgrid = Grid1D(args.plo if args.plo is not None else -span,
                       args.phi if args.phi is not None else span, pn)
        exact = ho_husimi_field(n, qgrid, pgrid, mode="unit")
        scf = None
        if args.mode in ("semiclassical", "both"):
            scf = sc_husimi(harmonic_level_energy(n), HarmonicSpec(), qgrid, pgrid,
                            period_samples=args.period_samples)
    else:
        system = MorseSystem.h2()
        state = morse_eigenstate(n, system)
        qgrid, pgrid, grid_meta = _morse_default_grids(n, system, qn, pn)
        if args.qlo is not None or args.qhi is not None:
            qgrid = Grid1D(args.qlo if args.qlo is not None else qgrid.lo,
                           args.qhi if args.qhi is not None else qgrid.hi, qn)
        if args.plo is not None or args.phi is not None:
            pgrid = Grid1D(args.plo if args.plo is not None else pgrid.lo,
                           args.phi if args.phi is not None else pgrid.hi, pn)
        manifest.parameters["morse"] = {
            "d_ev": system.d_well / 1.602176634e-19,
            "alpha": system.alpha_m,
            "r0": system.r0,
            "mu": system.mu,
            "omega_w": system.omega_w,
            "energy": state.energy,
        }
        manifest.parameters.update(grid_meta)
        exact = None
        if args.mode in ("exact", "both"):
            exact = _morse_exact_field(state, qgrid, pgrid)
        scf = None
        if args.mode in ("semiclassical", "both"):
            scf = sc_husimi(state.energy, system, qgrid, pgrid,
                            period_samples=args.period_samples)
        if args.mode == "semiclassical":
            exact = None

    wrote_exact = args.mode in ("exact", "both") and exact is not None
    if wrote_exact:
        manifest.outputs.extend(write_field_csv(exact, _with_tag(out, "_exact")))
    if scf is not None:
        manifest.outputs.extend(write_field_csv(scf, _with_tag(out, "_semiclassical")))
    if args.mode == "both":
        profile = delta_q(exact, scf, n)
        manifest.outputs.append(write_profile_csv(profile, _with_tag(out, "_delta")))
        manifest.results["sq"] = sq(profile)
    manifest.write(_with_tag(out, "_manifest").with_suffix(".json"))
    return 0


# ---------------------------------------------------------------------------
# fidelity
# ---------------------------------------------------------------------------


def _cmd_fidelity(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if args.system == "harmonic":
        system = HarmonicSpec(omega=args.omega)
    else:
        system = DrivenQuartic(gamma_d=args.gamma, omega_d=args.omega)
    ic = _parse_pair(args.ic, "--ic")
    eps = PerturbationSpec(args.epsilon)
    series = sc_fidelity_numeric(system, PhaseState(0.0, ic[0], ic[1]), eps,
                                 args.tmax, args.dt, NATURAL_SCALE)
    with np.errstate(divide="ignore"):
        rootlog = np.sqrt(-np.log(series.values))
    window = _parse_pair(args.fit_window, "--fit-window")
    fit = gaussian_decay_fit(series, window)
    manifest = RunManifest(
        command="fidelity",
        parameters={
            "system": args.system,
            "omega": args.omega,
            "gamma": args.gamma,
            "epsilon": args.epsilon,
            "ic": list(ic),
            "tmax": args.tmax,
            "dt": args.dt,
            "fit_window": list(window),
            "out": str(out),
        },
        results={"slope": fit.slope, "r2": fit.r2, "intercept": fit.intercept},
    )
    manifest.outputs.append(
        _write_csv(out, ["t", "F", "sqrt_neg_lnF"], zip(series.t, series.values, rootlog))
    )
    manifest.write(_with_tag(out, "_manifest").with_suffix(".json"))
    print(f"fit: slope={fit.slope:.6g} r2={fit.r2:.9g}")
    return 0


# ---------------------------------------------------------------------------
# lyapunov
# ---------------------------------------------------------------------------


def _cmd_lyapunov(args: argparse.Namespace) -> int:
    out = Path(args.out)
    ic = _parse_pair(args.ic, "--ic")
    if args.delta == 0.0:
        raise ValueError("--delta must be nonzero: twin separation needs D(0) > 0")
    s_a = PhaseState(0.0, ic[0], ic[1])
    s_b = PhaseState(0.0, ic[0] + args.delta, ic[1])
    if args.system == "harmonic":
        traj_a = sample_harmonic(s_a, args.omega, args.tmax, args.dt)
        traj_b = sample_harmonic(s_b, args.omega, args.tmax, args.dt)
    else:
        system = DrivenQuartic(gamma_d=args.gamma, omega_d=args.omega)
        traj_a = evolve_driven_quartic(s_a, system, args.tmax, args.dt)
        traj_b = evolve_driven_quartic(s_b, system, args.tmax, args.dt)
    sep = twin_separation(traj_a, traj_b)
    window = _parse_pair(args.window, "--window") if args.window else None
    lam_slope = lyapunov_short_time(sep, window)
    if window is None:
        i_lo = min(10, len(sep.t) - 3)
        i_hi = max(i_lo + 2, int(0.2 * len(sep.t)) - 1)
        window = (float(sep.t[i_lo]), float(sep.t[i_hi]))
    d_lo = float(np.interp(window[0], sep.t, sep.d))
    d_hi = float(np.interp(window[1], sep.t, sep.d))
    lam_overlap = lyapunov_from_overlap(
        math.exp(-d_lo * d_lo), math.exp(-d_hi * d_hi), window[1] - window[0]
    )
    with np.errstate(divide="ignore"):
        lnd = np.log(sep.d)
    manifest = RunManifest(
        command="lyapunov",
        parameters={
            "system": args.system,
            "omega": args.omega,
            "gamma": args.gamma,
            "ic": list(ic),
            "delta": args.delta,
            "tmax": args.tmax,
            "dt": args.dt,
            "window": list(window),
            "out": str(out),
        },
        results={"lambda_trajectory": lam_slope, "lambda_overlap": lam_overlap},
    )
    manifest.outputs.append(_write_csv(out, ["t", "D", "lnD"], zip(sep.t, sep.d, lnd)))
    manifest.write(_with_tag(out, "_manifest").with_suffix(".json"))
    print(f"lambda_trajectory={lam_slope:.6g} lambda_overlap={lam_overlap:.6g}")
    return 0


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def _cmd_metrics(args: argparse.Namespace) -> int:
    out = Path(args.out)
    levels = _parse_ints(args.levels, "--levels")
    if any(n < 0 for n in levels):
        raise ValueError("levels must be nonnegative")
    span = math.sqrt(2.0 * max(levels)) + args.pad
    qn = args.qn if args.qn % 2 == 1 else args.qn + 1  # keep a p = 0 row
    qgrid = Grid1D(-span, span, qn)
    pgrid = Grid1D(-span, span, qn)
    rows = []
    for n in levels:
        exact = ho_husimi_field(n, qgrid, pgrid, mode="unit")
        scf = sc_husimi(harmonic_level_energy(n), HarmonicSpec(), qgrid, pgrid,
                        period_samples=args.period_samples)
        rows.append((n, sq(delta_q(exact, scf, n))))
    manifest = RunManifest(
        command="metrics",
        parameters={
            "levels": levels,
            "qn": qn,
            "pad": args.pad,
            "period_samples": args.period_samples,
            "out": str(out),
        },
        results={"sq": {str(n): v for n, v in rows}},
    )
    manifest.outputs.append(write_sq_csv(rows, out))
    manifest.write(_with_tag(out, "_manifest").with_suffix(".json"))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cohdyn",
        description="Coherent-state dynamics datasets: overlap decay, Husimi "
        "fields, fidelity decay, Lyapunov estimates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("overlap", help="squared overlap of two evolved neighbouring states")
    p.add_argument("--omega", default="1.88,3.88", help="drive frequency (comma list)")
    p.add_argument("--gamma", type=float, default=1.0, help="drive amplitude")
    p.add_argument("--ic", default="0,0", help="first initial condition q,p")
    p.add_argument("--ic2", default="0.002,0", help="second initial condition q,p")
    p.add_argument("--tmax", type=float, default=60.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--out", default="overlap.csv")
    p.set_defaults(func=_cmd_overlap)

    p = sub.add_parser("husimi", help="exact and/or semiclassical Husimi fields")
    p.add_argument("--system", choices=("harmonic", "morse"), required=True)
    p.add_argument("--n", type=int, required=True, help="level index")
    p.add_argument("--mode", choices=("exact", "semiclassical", "both"), default="both")
    p.add_argument("--qlo", type=float, default=None)
    p.add_argument("--qhi", type=float, default=None)
    p.add_argument("--qn", type=int, default=None)
    p.add_argument("--plo", type=float, default=None)
    p.add_argument("--phi", type=float, default=None)
    p.add_argument("--pn", type=int, default=None)
    p.add_argument("--period-samples", dest="period_samples", type=int, default=2048)
    p.add_argument("--out", default="husimi.csv")
    p.set_defaults(func=_cmd_husimi)

    p = sub.add_parser("fidelity", help="fidelity decay under the linear perturbation")
    p.add_argument("--system", choices=("harmonic", "driven"), default="harmonic")
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--ic", default="0,0")
    p.add_argument("--tmax", type=float, default=5.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--fit-window", dest="fit_window", default="0.01,0.5")
    p.add_argument("--out", default="fidelity.csv")
    p.set_defaults(func=_cmd_fidelity)

    p = sub.add_parser("lyapunov", help="twin-trajectory separation and exponent estimates")
    p.add_argument("--system", choices=("driven", "harmonic"), default="driven")
    p.add_argument("--omega", type=float, default=1.88)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--ic", default="0,0")
    p.add_argument("--delta", type=float, default=0.002, help="twin offset in q")
    p.add_argument("--tmax", type=float, default=40.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--window", default=None, help="fit window t_lo,t_hi")
    p.add_argument("--out", default="lyapunov.csv")
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("metrics", help="integrated exact-vs-semiclassical deviation per level")
    p.add_argument("--levels", default="0,1,5,20,100")
    p.add_argument("--qn", type=int, default=161)
    p.add_argument("--pad", type=float, default=6.0)
    p.add_argument("--period-samples", dest="period_samples", type=int, default=2048)
    p.add_argument("--out", default="sq.csv")
    p.set_defaults(func=_cmd_metrics)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (QuadratureError, OdeBlowupError, TruncationError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

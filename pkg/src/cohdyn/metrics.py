"""Quantum-classical deviation metrics between exact and semiclassical Husimi fields.

DeltaQ is the pointwise difference of the two fields along the p = 0 slice
(the slice the spherical symmetry singles out); SQ is the L1 norm of that
profile.  Both fields must be on identical grids and unit-normalized, since a
difference of inconsistently normalized fields is meaningless.  Pure
functions; thread-safe.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .husimi import HusimiField
from .numkit import Grid1D, integrate_1d

__all__ = [
    "DeviationProfile",
    "delta_q",
    "sq",
    "sq_plane",
    "write_profile_csv",
    "write_sq_csv",
]


@dataclass(frozen=True)
class DeviationProfile:
    """DeltaQ values along the p = 0 row, plus the support used for SQ."""

    qgrid: Grid1D
    delta: np.ndarray
    n: int
    support: tuple[float, float]

    def __post_init__(self) -> None:
        if len(self.delta) != self.qgrid.n:
            raise ValueError("delta length must match the grid")
        if not np.all(np.isfinite(self.delta)):
            raise ValueError("delta values must be finite")


def _p_zero_index(pgrid: Grid1D) -> int:
    ppts = pgrid.points()
    j = int(np.argmin(np.abs(ppts)))
    if abs(ppts[j]) > 1e-9 * max(1.0, abs(ppts).max()):
        raise ValueError("grid has no p = 0 row")
    return j


def delta_q(exact: HusimiField, sc: HusimiField, n: int) -> DeviationProfile:
    """Pointwise difference exact - semiclassical along the p = 0 row.

    Requires identical grids and matching unit normalization.  The returned
    profile records the q-support where either slice exceeds 1e-12 of its
    peak, which bounds the SQ integration range.
    """
    if exact.qgrid != sc.qgrid or exact.pgrid != sc.pgrid:
        raise ValueError("fields must share identical grids")
    if exact.norm_mode != sc.norm_mode:
        raise ValueError(
            f"normalization mismatch: {exact.norm_mode!r} vs {sc.norm_mode!r}"
        )
    if exact.norm_mode != "unit":
        raise ValueError("deviation metrics require unit-normalized fields")
    j = _p_zero_index(exact.pgrid)
    slice_e = exact.values[:, j]
    slice_s = sc.values[:, j]
    delta = slice_e - slice_s

    qpts = exact.qgrid.points()
    live = (slice_e > 1e-12 * slice_e.max()) | (slice_s > 1e-12 * slice_s.max())
    if np.any(live):
        idx = np.flatnonzero(live)
        support = (float(qpts[idx[0]]), float(qpts[idx[-1]]))
    else:
        support = (float(qpts[0]), float(qpts[-1]))
    return DeviationProfile(qgrid=exact.qgrid, delta=delta, n=n, support=support)


def sq(profile: DeviationProfile, tol: float = 1e-10) -> float:
    """Integrated absolute deviation: integral of |DeltaQ(q)| dq over the support.

    Integrates the linear interpolant of |delta| with the adaptive quadrature,
    so the value is grid-stable once the fields are resolved.
    """
    qpts = profile.qgrid.points()
    mag = np.abs(profile.delta)

    def f(x: float) -> float:
        return float(np.interp(x, qpts, mag))

    lo, hi = profile.support
    if lo >= hi:
        return 0.0
    return integrate_1d(f, lo, hi, tol)


def sq_plane(exact: HusimiField, sc: HusimiField) -> float:
    """Full-plane L1 deviation (trapezoid over the grid); not used by SQ trends."""
    if exact.qgrid != sc.qgrid or exact.pgrid != sc.pgrid:
        raise ValueError("fields must share identical grids")
    if exact.norm_mode != sc.norm_mode:
        raise ValueError("normalization mismatch")
    diff = np.abs(exact.values - sc.values)
    inner = np.trapezoid(diff, dx=exact.pgrid.spacing, axis=1)
    return float(np.trapezoid(inner, dx=exact.qgrid.spacing))


def write_profile_csv(profile: DeviationProfile, path: str | Path) -> str:
    """CSV rows q,delta for a deviation profile."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["q", "delta"])
        for qv, dv in zip(profile.qgrid.points(), profile.delta):
            writer.writerow([f"{qv:.17g}", f"{dv:.17g}"])
    return str(path)


def write_sq_csv(rows: Sequence[tuple[int, float]], path: str | Path) -> str:
    """CSV rows n,SQ for a sequence of levels."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "SQ"])
        for n, value in rows:
            writer.writerow([str(int(n)), f"{value:.17g}"])
    return str(path)

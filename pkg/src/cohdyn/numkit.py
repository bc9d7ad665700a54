"""Foundational numerics: gamma function, adaptive 1-D quadrature, fixed-step RK4.

Everything here is a pure function of its arguments (no module state), so all
routines are safe to call concurrently.  Computations are done in plain double
precision; callers work in dimensionless units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Grid1D",
    "OdeProblem",
    "OdeSolution",
    "QuadratureError",
    "OdeBlowupError",
    "gamma_fn",
    "log_gamma_fn",
    "integrate_1d",
    "integrate_ode",
    "scan_support",
]

# Lanczos approximation, g = 7, 9 coefficients.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_LOG_PI = math.log(math.pi)
# Largest x with exp(x) finite in double precision.
_EXP_MAX = 709.782712893384


def _lanczos_log_gamma(x: float) -> float:
    """log Gamma via Lanczos for x >= 0.5."""
    z = x - 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, 9):
        acc += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_gamma_fn(x: float) -> float:
    """Natural log of Gamma(x) for x > 0.

    Raises ValueError for x <= 0 or non-finite input.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma_fn requires x > 0, got {x}")
    if x >= 0.5:
        return _lanczos_log_gamma(x)
    # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x); both sides positive here.
    return _LOG_PI - math.log(math.sin(math.pi * x)) - _lanczos_log_gamma(1.0 - x)


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0.

    Raises ValueError for x <= 0 and OverflowError once Gamma(x) exceeds the
    double-precision range (x around 171.6; use log_gamma_fn there).
    """
    lg = log_gamma_fn(x)
    if lg > _EXP_MAX:
        raise OverflowError(f"gamma_fn({x}) exceeds double-precision range")
    return math.exp(lg)


@dataclass(frozen=True)
class Grid1D:
    """Uniform 1-D grid with n samples on [lo, hi]."""

    lo: float
    hi: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("grid bounds must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"grid needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.n - 1)

    def points(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n)


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge; carries the best estimate."""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


_MAX_DEPTH = 40


def integrate_1d(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Adaptive-Simpson estimate of the integral of f over [lo, hi].

    Subdivides until the Richardson error estimate of every panel is within its
    share of tol (absolute).  Raises QuadratureError if any panel is still out
    of tolerance at depth 40; the exception carries the best estimate and the
    summed error bound of the failed panels.  Semi-infinite integrands must be
    truncated by the caller (see scan_support).
    """
    if not tol > 0.0:
        raise ValueError("tol must be > 0")
    lo = float(lo)
    hi = float(hi)
    if lo == hi:
        return 0.0
    if lo > hi:
        raise ValueError("integrate_1d requires lo <= hi")

    failed: list[float] = []

    def simpson(a: float, fa: float, m: float, fm: float, b: float, fb: float) -> float:
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, m, fm, b, fb, whole, budget, depth):
        ml = 0.5 * (a + m)
        mr = 0.5 * (m + b)
        fml = float(f(ml))
        fmr = float(f(mr))
        left = simpson(a, fa, ml, fml, m, fm)
        right = simpson(m, fm, mr, fmr, b, fb)
        err = (left + right - whole) / 15.0
        if abs(err) <= budget:
            return left + right + err
        if depth >= _MAX_DEPTH:
            failed.append(abs(err))
            return left + right + err
        return recurse(a, fa, ml, fml, m, fm, left, 0.5 * budget, depth + 1) + recurse(
            m, fm, mr, fmr, b, fb, right, 0.5 * budget, depth + 1
        )

    fa = float(f(lo))
    fb = float(f(hi))
    mid = 0.5 * (lo + hi)
    fm = float(f(mid))
    whole = simpson(lo, fa, mid, fm, hi, fb)
    result = recurse(lo, fa, mid, fm, hi, fb, whole, tol, 0)
    if failed:
        raise QuadratureError(
            f"quadrature did not converge on {len(failed)} panel(s) at depth {_MAX_DEPTH}",
            estimate=result,
            error_bound=float(sum(failed)),
        )
    return result


def scan_support(
    f: Callable[[float], float],
    peak: float,
    step: float,
    floor_ratio: float = 1e-14,
    max_span: float = 1e6,
) -> tuple[float, float]:
    """Truncation bounds for an exponentially localized integrand.

    Scans outward from `peak` in increments of `step` until |f| stays below
    floor_ratio times |f(peak)| for three consecutive probes, and returns the
    resulting (lo, hi) interval.
    """
    if not step > 0.0:
        raise ValueError("step must be > 0")
    ref = abs(float(f(peak)))
    if not math.isfinite(ref) or ref == 0.0:
        raise ValueError("scan_support needs a finite nonzero value at the peak")
    threshold = floor_ratio * ref

    def edge(direction: float) -> float:
        x = peak
        quiet = 0
        while abs(x - peak) < max_span:
            x += direction * step
            if abs(float(f(x))) < threshold:
                quiet += 1
                if quiet >= 3:
                    return x
            else:
                quiet = 0
        return x

    return edge(-1.0), edge(+1.0)


@dataclass(frozen=True)
class OdeProblem:
    """Fixed-step initial value problem y' = rhs(t, y) on [t0, t1]."""

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    t1: float
    h: float

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")
        if not self.h > 0.0:
            raise ValueError("step size h must be > 0")
        if not self.t1 > self.t0:
            raise ValueError("need t1 > t0")
        if not math.isfinite((self.t1 - self.t0) / self.h):
            raise ValueError("(t1 - t0) / h must be finite")
        y0 = np.asarray(self.y0, dtype=float)
        if y0.shape != (self.dimension,):
            raise ValueError(f"y0 must have shape ({self.dimension},)")
        object.__setattr__(self, "y0", y0)


@dataclass(frozen=True)
class OdeSolution:
    """Solution sampled at every RK4 step: t has shape (m,), y has shape (m, dim)."""

    t: np.ndarray
    y: np.ndarray


class OdeBlowupError(RuntimeError):
    """Integration produced a non-finite state; carries the last valid time."""

    def __init__(self, message: str, last_valid_time: float):
        super().__init__(message)
        self.last_valid_time = last_valid_time


def integrate_ode(problem: OdeProblem) -> OdeSolution:
    """Classical fixed-step RK4, sampled at every step.

    The number of steps is round((t1 - t0) / h), so the final sample lands
    within h of t1.  The step sequence is a pure function of (t0, t1, h),
    which keeps twin integrations on identical grids.
    """
    h = problem.h
    n_steps = max(1, int(round((problem.t1 - problem.t0) / h)))
    t = problem.t0 + h * np.arange(n_steps + 1)
    y = np.empty((n_steps + 1, problem.dimension))
    y[0] = problem.y0
    rhs = problem.rhs
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(n_steps):
        ti = t[i]
        yi = y[i]
        k1 = np.asarray(rhs(ti, yi), dtype=float)
        k2 = np.asarray(rhs(ti + half, yi + half * k1), dtype=float)
        k3 = np.asarray(rhs(ti + half, yi + half * k2), dtype=float)
        k4 = np.asarray(rhs(ti + h, yi + h * k3), dtype=float)
        ynext = yi + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        if not np.all(np.isfinite(ynext)):
            raise OdeBlowupError(
                f"integration blew up after t = {ti}", last_valid_time=float(ti)
            )
        y[i + 1] = ynext
    return OdeSolution(t=t, y=y)

"""Classical dynamics for the three model systems, plus twin-trajectory tools.

Systems: harmonic oscillator (closed form, scaled chart with H = w(Q^2+P^2)/2),
Morse potential at zero angular momentum (closed-form orbit in the dimensionless
displacement x = (r - r0)/r0), and the driven quartic oscillator
x'' + x^3 = g sin(w t) (fixed-step RK4).  Harmonic and driven systems live in
dimensionless natural units (hbar = m = 1); Morse parameters are SI and all SI
handling is confined to MorseSystem.

Trajectory generation is pure and trajectories are immutable, so twins may be
integrated and analysed concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numkit import OdeProblem, integrate_ode

__all__ = [
    "HBAR",
    "EV",
    "M_HYDROGEN",
    "PhaseState",
    "Trajectory",
    "HarmonicSpec",
    "DrivenQuartic",
    "MorseSystem",
    "SeparationSeries",
    "GridMismatchError",
    "evolve_harmonic",
    "sample_harmonic",
    "morse_x",
    "morse_momentum",
    "morse_period",
    "morse_orbit",
    "morse_label",
    "evolve_driven_quartic",
    "twin_separation",
    "lyapunov_short_time",
    "lyapunov_from_overlap",
]

HBAR = 1.054571817e-34  # J s
EV = 1.602176634e-19  # J
M_HYDROGEN = 1.6735328e-27  # kg, hydrogen atom


@dataclass(frozen=True)
class PhaseState:
    """Canonical pair (q, p) with a time stamp; dimensionless internal units."""

    t: float
    q: float
    p: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.t, self.q, self.p)):
            raise ValueError("PhaseState components must be finite")


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled phase-space path with accumulated action per sample."""

    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    action: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.t)
        if not (len(self.q) == len(self.p) == len(self.action) == n) or n < 2:
            raise ValueError("trajectory arrays must share a length >= 2")
        steps = np.diff(self.t)
        if not np.all(steps > 0.0):
            raise ValueError("sample times must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("sample times must be uniformly spaced")
        if self.action[0] != 0.0:
            raise ValueError("action must start at 0")

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> PhaseState:
        return PhaseState(t=float(self.t[i]), q=float(self.q[i]), p=float(self.p[i]))


@dataclass(frozen=True)
class HarmonicSpec:
    """Harmonic oscillator in the scaled chart, H = omega (Q^2 + P^2) / 2."""

    omega: float = 1.0

    def __post_init__(self) -> None:
        if not self.omega > 0.0:
            raise ValueError("omega must be > 0")


@dataclass(frozen=True)
class DrivenQuartic:
    """Driven conservative quartic oscillator x'' + x^3 = gamma_d sin(omega_d t)."""

    gamma_d: float = 1.0
    omega_d: float = 1.88

    def __post_init__(self) -> None:
        if not (math.isfinite(self.gamma_d) and math.isfinite(self.omega_d)):
            raise ValueError("drive parameters must be finite")


def _accumulated_action(t: np.ndarray, lagrangian: np.ndarray) -> np.ndarray:
    """Trapezoid-rule running integral of L over the sample grid, starting at 0."""
    dt = t[1] - t[0]
    increments = 0.5 * dt * (lagrangian[1:] + lagrangian[:-1])
    action = np.empty_like(t)
    action[0] = 0.0
    np.cumsum(increments, out=action[1:])
    return action


def evolve_harmonic(s0: PhaseState, omega: float, t: float) -> PhaseState:
    """Closed-form harmonic evolution by elapsed time t.

    Pure rotation Q -> Q cos(wt) + P sin(wt), P -> P cos(wt) - Q sin(wt), which
    conserves the scaled-chart energy w (Q^2 + P^2) / 2 exactly.
    """
    if not omega > 0.0:
        raise ValueError("omega must be > 0")
    c = math.cos(omega * t)
    s = math.sin(omega * t)
    return PhaseState(
        t=s0.t + t, q=s0.q * c + s0.p * s, p=s0.p * c - s0.q * s
    )


def sample_harmonic(s0: PhaseState, omega: float, t1: float, h: float) -> Trajectory:
    """Harmonic trajectory sampled every h up to t1, with accumulated action."""
    if not h > 0.0:
        raise ValueError("h must be > 0")
    n_steps = max(1, int(round((t1 - s0.t) / h)))
    t = s0.t + h * np.arange(n_steps + 1)
    phase = omega * (t - s0.t)
    c = np.cos(phase)
    s = np.sin(phase)
    q = s0.q * c + s0.p * s
    p = s0.p * c - s0.q * s
    # L = P dQ/dt - H = omega (P^2 - Q^2) / 2 in the scaled chart
    lag = 0.5 * omega * (p * p - q * q)
    return Trajectory(t=t, q=q, p=p, action=_accumulated_action(t, lag))


@dataclass(frozen=True)
class MorseSystem:
    """Morse oscillator U(x) = D (e^(-2 a x) - 2 e^(-a x)), x = (r - r0)/r0.

    Parameters are SI: well depth d_well [J], dimensionless steepness alpha_m,
    equilibrium separation r0 [m], reduced mass mu [kg].  Derived constants:
    gamma_c = r0 sqrt(2 mu D)/hbar, zeta2 = 2 gamma_c / alpha_m, well frequency
    omega_w = (alpha_m/r0) sqrt(2 D / mu), bound-level count
    ceil((zeta2 - 1)/2), and sigma2 = alpha_m * gamma_c = mu omega_w r0^2 /
    hbar, the squared ratio of r0 to the coherent-state length.
    """

    d_well: float
    alpha_m: float
    r0: float
    mu: float
    hbar: float = HBAR

    def __post_init__(self) -> None:
        for name in ("d_well", "alpha_m", "r0", "mu", "hbar"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0")
        if not self.zeta2 > 1.0:
            raise ValueError("well too shallow: zeta2 must exceed 1 (no bound state)")

    @classmethod
    def from_ev(cls, d_ev: float, alpha_m: float, r0: float, mu: float) -> "MorseSystem":
        return cls(d_well=d_ev * EV, alpha_m=alpha_m, r0=r0, mu=mu)

    @classmethod
    def h2(cls) -> "MorseSystem":
        """Hydrogen-molecule parameters: D = 4.75 eV, alpha = 1.440, r0 = 0.742 A."""
        return cls.from_ev(d_ev=4.75, alpha_m=1.440, r0=7.42e-11, mu=0.5 * M_HYDROGEN)

    @property
    def gamma_c(self) -> float:
        return self.r0 * math.sqrt(2.0 * self.mu * self.d_well) / self.hbar

    @property
    def zeta2(self) -> float:
        return 2.0 * self.gamma_c / self.alpha_m

    @property
    def omega_w(self) -> float:
        return (self.alpha_m / self.r0) * math.sqrt(2.0 * self.d_well / self.mu)

    @property
    def n_levels(self) -> int:
        return math.ceil((self.zeta2 - 1.0) / 2.0)

    @property
    def sigma2(self) -> float:
        return self.alpha_m * self.gamma_c

    def potential(self, x) -> np.ndarray:
        """U(x) in joules."""
        e = np.exp(-self.alpha_m * np.asarray(x, dtype=float))
        return self.d_well * (e * e - 2.0 * e)


def _check_bound_energy(energy: float, system: MorseSystem) -> float:
    if not -system.d_well < energy < 0.0:
        raise ValueError(
            f"bound motion requires -D < E < 0, got E = {energy} with D = {system.d_well}"
        )
    return abs(energy)


def morse_x(t, energy: float, system: MorseSystem):
    """Closed-form Morse trajectory x(t) at energy E < 0 (t in seconds).

    x(t) = (1/a) ln{ D/|E| + sin(t sqrt(2|E|a^2/(mu r0^2))) sqrt((D^2+ED)/E^2) };
    the value stays between the two classical turning points.
    """
    abs_e = _check_bound_energy(energy, system)
    frac = abs_e / system.d_well
    omega_orbit = 2.0 * math.pi / morse_period(energy, system)
    amp = math.sqrt(1.0 - frac)
    arg = (1.0 + amp * np.sin(omega_orbit * np.asarray(t, dtype=float))) / frac
    out = np.log(arg) / system.alpha_m
    return float(out) if out.ndim == 0 else out


def morse_momentum(t, energy: float, system: MorseSystem):
    """Momentum mu r0^2 dx/dt [J s] along the closed-form Morse orbit.

    This is the momentum conjugate to the dimensionless displacement x; divide
    by hbar (see morse_label) to reach the coherent-label chart.
    """
    abs_e = _check_bound_energy(energy, system)
    frac = abs_e / system.d_well
    omega_orbit = 2.0 * math.pi / morse_period(energy, system)
    amp = math.sqrt(1.0 - frac)
    phase = omega_orbit * np.asarray(t, dtype=float)
    # mu r0^2 d/dt ln(arg)/a with arg = (1 + amp sin)/frac
    scale = system.hbar * system.gamma_c * math.sqrt(frac * (1.0 - frac))
    out = scale * np.cos(phase) / (1.0 + amp * np.sin(phase))
    return float(out) if out.ndim == 0 else out


def morse_period(energy: float, system: MorseSystem) -> float:
    """Period 2 pi sqrt(mu r0^2 / (2|E| a^2)) of the bound orbit at energy E."""
    abs_e = _check_bound_energy(energy, system)
    return 2.0 * math.pi * math.sqrt(
        system.mu * system.r0**2 / (2.0 * abs_e * system.alpha_m**2)
    )


def morse_orbit(
    energy: float, system: MorseSystem, n_samples: int, t0_offset: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """One full period of the Morse orbit, as dimensionless (r/r0, p r0/hbar).

    Returns n_samples uniform samples covering exactly one period starting at
    t0_offset (seconds).
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    period = morse_period(energy, system)
    t = t0_offset + period * np.arange(n_samples) / n_samples
    u = 1.0 + morse_x(t, energy, system)
    ptil = morse_momentum(t, energy, system) / system.hbar
    return u, ptil


def morse_label(x, p_m, system: MorseSystem):
    """Coherent label for the Morse phase point (x, mu r0^2 dx/dt).

    Single place where the momentum is scaled by 1/hbar: with u = 1 + x,
    ptil = p_m/hbar and sigma^2 = mu omega_w r0^2 / hbar, the label is
    (sigma u + i ptil / sigma) / sqrt(2).
    """
    sigma = math.sqrt(system.sigma2)
    u = 1.0 + np.asarray(x, dtype=float)
    ptil = np.asarray(p_m, dtype=float) / system.hbar
    out = (sigma * u + 1j * ptil / sigma) / math.sqrt(2.0)
    return complex(out) if out.ndim == 0 else out


def _driven_rhs(d: DrivenQuartic, extra_force: float = 0.0):
    g, w = d.gamma_d, d.omega_d

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -y[0] ** 3 + g * math.sin(w * t) + extra_force])

    return rhs


def evolve_driven_quartic(
    s0: PhaseState, d: DrivenQuartic, t1: float, h: float, extra_force: float = 0.0
) -> Trajectory:
    """RK4 trajectory of the driven quartic oscillator up to t1 with step h.

    The accumulated action uses L = p^2/2 - q^4/4 + q (gamma_d sin(omega_d t)
    + extra_force) on the same sample grid (trapezoid rule).
    """
    problem = OdeProblem(
        dimension=2,
        rhs=_driven_rhs(d, extra_force),
        y0=np.array([s0.q, s0.p]),
        t0=s0.t,
        t1=t1,
        h=h,
    )
    sol = integrate_ode(problem)
    q = sol.y[:, 0]
    p = sol.y[:, 1]
    drive = d.gamma_d * np.sin(d.omega_d * sol.t) + extra_force
    lag = 0.5 * p * p - 0.25 * q**4 + q * drive
    return Trajectory(t=sol.t, q=q, p=p, action=_accumulated_action(sol.t, lag))


class SeparationSeries(NamedTuple):
    """Phase-space distance of two trajectories on their shared time grid."""

    t: np.ndarray
    d: np.ndarray


class GridMismatchError(ValueError):
    """Two trajectories do not share the same time grid."""


def twin_separation(traj_a: Trajectory, traj_b: Trajectory) -> SeparationSeries:
    """Euclidean phase-space distance sqrt(dq^2 + dp^2) per shared sample."""
    if len(traj_a.t) != len(traj_b.t) or not np.array_equal(traj_a.t, traj_b.t):
        raise GridMismatchError("trajectories must share an identical time grid")
    d = np.hypot(traj_a.q - traj_b.q, traj_a.p - traj_b.p)
    return SeparationSeries(t=traj_a.t.copy(), d=d)


def _default_window(t: np.ndarray) -> tuple[float, float]:
    # first 20% of the series, excluding the first 10 samples
    i_lo = min(10, len(t) - 3)
    i_hi = max(i_lo + 2, int(0.2 * len(t)) - 1)
    return float(t[i_lo]), float(t[min(i_hi, len(t) - 1)])


def lyapunov_short_time(
    sep: SeparationSeries, fit_window: tuple[float, float] | None = None
) -> float:
    """Least-squares slope of ln D(t) over the fit window.

    The window defaults to the first 20% of the series with the first 10
    samples excluded.  Requires D > 0 on the window and at least 3 points.
    """
    t, d = sep
    if fit_window is None:
        fit_window = _default_window(t)
    t_lo, t_hi = fit_window
    mask = (t >= t_lo) & (t <= t_hi)
    if int(mask.sum()) < 3:
        raise ValueError("fit window must contain at least 3 samples")
    dw = d[mask]
    if not np.all(dw > 0.0):
        raise ValueError("separation must be > 0 throughout the fit window")
    slope, _ = np.polyfit(t[mask], np.log(dw), 1)
    return float(slope)


def lyapunov_from_overlap(ov0: float, ov_t: float, t_span: float) -> float:
    """Largest Lyapunov exponent from two squared coherent-state overlaps.

    lambda = 1/(2T) ln[ ln(1/ov(T)) / ln(1/ov(0)) ], for overlaps built from
    the twin separation as ov = exp(-D^2).
    """
    if not t_span > 0.0:
        raise ValueError("T must be > 0")
    for name, v in (("ov0", ov0), ("ov_t", ov_t)):
        if not 0.0 < v < 1.0:
            raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
    return 0.5 / t_span * math.log(math.log(1.0 / ov_t) / math.log(1.0 / ov0))

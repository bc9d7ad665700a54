"""Zeroth-order scalar products of classically evolved coherent states.

The leading term of the expansion keeps each state a coherent state whose
label follows the classical flow, so the squared overlap of two evolved states
is exp(-|alpha_A(t) - alpha_B(t)|^2) and everything here reduces to label
paths.  Pure transformations over immutable trajectories; thread-safe.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .coherent import NATURAL_SCALE, OscillatorScale, alpha_from_qp
from .dynamics import (
    DrivenQuartic,
    HarmonicSpec,
    PhaseState,
    Trajectory,
    evolve_driven_quartic,
    sample_harmonic,
    twin_separation,
)
from .numkit import OdeProblem, integrate_ode

__all__ = [
    "OverlapSeries",
    "PerturbationSpec",
    "TauSc",
    "GaussianFit",
    "sc_overlap",
    "tau_sc",
    "sc_fidelity_closed",
    "sc_fidelity_numeric",
    "gaussian_decay_fit",
]


@dataclass(frozen=True)
class OverlapSeries:
    """Squared-modulus overlap per sample, optionally with the relative phase."""

    t: np.ndarray
    values: np.ndarray
    phase: np.ndarray | None = None

    def __post_init__(self) -> None:
        if len(self.t) != len(self.values) or len(self.t) == 0:
            raise ValueError("times and values must share a nonzero length")
        if np.any(self.values < 0.0) or np.any(self.values > 1.0 + 1e-12):
            raise ValueError("overlap values must lie in [0, 1]")


@dataclass(frozen=True)
class PerturbationSpec:
    """Strength of the linear perturbation epsilon * hbar * (a + a^dagger)."""

    epsilon: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError("epsilon must be finite and >= 0")
        if self.epsilon > 0.3:
            warnings.warn(
                f"epsilon = {self.epsilon} is not small; the short-time "
                "linear-response picture assumes epsilon << 1",
                stacklevel=2,
            )


def _label_chart(traj: Trajectory, scale: OscillatorScale) -> Trajectory:
    """Trajectory re-expressed in label coordinates (Re alpha, Im alpha)."""
    alpha = alpha_from_qp(traj.q, traj.p, scale)
    return replace(traj, q=alpha.real, p=alpha.imag)


def sc_overlap(
    traj_a: Trajectory,
    traj_b: Trajectory,
    scale: OscillatorScale = NATURAL_SCALE,
    with_phase: bool = False,
) -> OverlapSeries:
    """Squared overlap exp(-|alpha_A(t) - alpha_B(t)|^2) of two evolved states.

    Computed as exp(-D^2) with D the twin separation of the label paths, so it
    is exactly consistent with dynamics.twin_separation composed with the
    label map.  With with_phase=True the series also carries the relative
    phase Im(alpha_A conj(alpha_B)) + (S_A - S_B) / hbar.
    """
    la = _label_chart(traj_a, scale)
    lb = _label_chart(traj_b, scale)
    sep = twin_separation(la, lb)
    values = np.exp(-sep.d**2)
    phase = None
    if with_phase:
        alpha_a = la.q + 1j * la.p
        alpha_b = lb.q + 1j * lb.p
        phase = np.imag(alpha_a * np.conj(alpha_b)) + (
            traj_a.action - traj_b.action
        ) / scale.hbar
    return OverlapSeries(t=sep.t, values=values, phase=phase)


class TauSc(NamedTuple):
    """First crossing time of the overlap threshold; reached=False at series end."""

    time: float
    reached: bool


def tau_sc(series: OverlapSeries, dm: float) -> TauSc:
    """First time the overlap drops below exp(-dm^2).

    dm is the phase-space distance beyond which the leading term stops
    dominating.  The crossing is located by linear interpolation of
    ln(-ln value) between the bracketing samples, which is exact for
    exponential separation growth.  If the series never crosses, the end time
    is returned tagged reached=False.
    """
    if not dm > 0.0:
        raise ValueError("dm must be > 0")
    if len(series.t) == 0:
        raise ValueError("empty overlap series")
    threshold = math.exp(-dm * dm)
    below = np.flatnonzero(series.values < threshold)
    if below.size == 0:
        return TauSc(time=float(series.t[-1]), reached=False)
    i = int(below[0])
    if i == 0:
        return TauSc(time=float(series.t[0]), reached=True)
    v_prev, v_next = float(series.values[i - 1]), float(series.values[i])
    t_prev, t_next = float(series.t[i - 1]), float(series.t[i])
    if v_prev >= 1.0:  # cannot take ln(-ln 1); crossing starts inside the step
        return TauSc(time=t_next, reached=True)
    g_prev = math.log(-math.log(v_prev))
    g_next = math.log(-math.log(v_next))
    g_star = math.log(dm * dm)
    frac = (g_star - g_prev) / (g_next - g_prev)
    return TauSc(time=t_prev + frac * (t_next - t_prev), reached=True)


def sc_fidelity_closed(eps: PerturbationSpec, t):
    """Closed-form short-time echo amplitude exp(-eps^2 t^2 / 2 - i eps t).

    Its squared modulus, the fidelity, is the Gaussian exp(-eps^2 t^2)
    independently of the regular or chaotic character of the dynamics.
    """
    t = np.asarray(t, dtype=float)
    out = np.exp(-0.5 * eps.epsilon**2 * t**2 - 1j * eps.epsilon * t)
    return complex(out) if out.ndim == 0 else out


def _perturbation_force(eps: PerturbationSpec, scale: OscillatorScale) -> float:
    # classical footprint of eps hbar (a + a^dagger): linear potential
    # eps sqrt(2 m w hbar) q, i.e. a constant force of that magnitude
    return -eps.epsilon * math.sqrt(2.0 * scale.mass * scale.omega * scale.hbar)


def _harmonic_lab_trajectory(
    s0: PhaseState, omega: float, t1: float, h: float, force: float
) -> Trajectory:
    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -omega * omega * y[0] + force])

    problem = OdeProblem(
        dimension=2, rhs=rhs, y0=np.array([s0.q, s0.p]), t0=s0.t, t1=t1, h=h
    )
    sol = integrate_ode(problem)
    q, p = sol.y[:, 0], sol.y[:, 1]
    lag = 0.5 * p * p - 0.5 * omega * omega * q * q + force * q
    dt = sol.t[1] - sol.t[0]
    action = np.concatenate(
        ([0.0], np.cumsum(0.5 * dt * (lag[1:] + lag[:-1])))
    )
    return Trajectory(t=sol.t, q=q, p=p, action=action)


def sc_fidelity_numeric(
    system: HarmonicSpec | DrivenQuartic,
    s0: PhaseState,
    eps: PerturbationSpec,
    t1: float,
    h: float,
    scale: OscillatorScale = NATURAL_SCALE,
) -> OverlapSeries:
    """Fidelity exp(-|alpha(t) - beta(t)|^2) from two classical integrations.

    alpha follows the unperturbed system and beta the same system with the
    constant force of the linear perturbation added; both start from s0 and
    are integrated on the same RK4 grid.
    """
    force = _perturbation_force(eps, scale)
    if isinstance(system, HarmonicSpec):
        traj_0 = _harmonic_lab_trajectory(s0, system.omega, t1, h, force=0.0)
        traj_v = _harmonic_lab_trajectory(s0, system.omega, t1, h, force=force)
    elif isinstance(system, DrivenQuartic):
        traj_0 = evolve_driven_quartic(s0, system, t1, h)
        traj_v = evolve_driven_quartic(s0, system, t1, h, extra_force=force)
    else:
        raise TypeError(f"unsupported system {system!r}")
    return sc_overlap(traj_0, traj_v, scale)


class GaussianFit(NamedTuple):
    """Line fit of sqrt(-ln F) against t: slope estimates the perturbation strength."""

    slope: float
    r2: float
    intercept: float


def gaussian_decay_fit(series: OverlapSeries, window: tuple[float, float]) -> GaussianFit:
    """Least-squares line through sqrt(-ln F(t)) on the window.

    For a Gaussian decay F = exp(-eps^2 t^2) the points fall on a straight
    line of slope eps; r^2 quantifies how Gaussian the decay is.  All values
    in the window must lie strictly inside (0, 1).
    """
    t_lo, t_hi = window
    mask = (series.t >= t_lo) & (series.t <= t_hi)
    if int(mask.sum()) < 3:
        raise ValueError("fit window must contain at least 3 samples")
    values = series.values[mask]
    if np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError("fit window must have overlap values strictly inside (0, 1)")
    x = series.t[mask]
    y = np.sqrt(-np.log(values))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0.0 else 1.0
    return GaussianFit(slope=float(slope), r2=r2, intercept=float(intercept))

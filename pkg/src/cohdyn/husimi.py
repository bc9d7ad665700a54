"""Husimi phase-space distributions, exact and semiclassical.

Exact routes: the closed form for harmonic-oscillator eigenstates, an
independent quadrature route through the eigenfunctions, and a quadrature
route for Morse bound states (radial overlap with a displaced Gaussian whose
angular integral is done analytically).  The semiclassical route time-averages
the squared overlap between a fixed coherent state and a coherent state
carried along the classical orbit of matching energy.

Normalization modes: "raw" evaluates the defining formulas as they stand;
"unit" rescales so the field integrates to one over the (Q, P) plane.
Comparisons between exact and semiclassical fields should always use "unit".

Grid evaluation is embarrassingly parallel: every function here is pure, and
fields are immutable once built, so concurrent evaluation of grid points gives
deterministic output independent of scheduling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import HarmonicSpec, MorseSystem, morse_orbit, morse_period
from .numkit import Grid1D, integrate_1d, log_gamma_fn, scan_support

__all__ = [
    "HusimiField",
    "MorseEigenstate",
    "TruncationError",
    "husimi_ho_closed",
    "ho_husimi_field",
    "ho_eigenfunction",
    "ho_husimi_from_wavefunction",
    "harmonic_level_energy",
    "morse_eigenvalue",
    "morse_eigenstate",
    "morse_eigenfunction",
    "morse_husimi",
    "sc_husimi",
    "normalize_unit",
    "write_field_csv",
]

_SQRT2 = math.sqrt(2.0)
_QUARTER_PI = math.pi ** -0.25


@dataclass(frozen=True)
class HusimiField:
    """Values on a rectangular (Q, P) grid; values[i, j] sits at (q_i, p_j)."""

    qgrid: Grid1D
    pgrid: Grid1D
    values: np.ndarray
    norm_mode: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.qgrid.n, self.pgrid.n):
            raise ValueError(
                f"values shape {v.shape} does not match grids "
                f"({self.qgrid.n}, {self.pgrid.n})"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        if np.any(v < 0.0):
            raise ValueError("field values must be nonnegative")
        object.__setattr__(self, "values", v)

    def grid_integral(self) -> float:
        """Trapezoid integral of the field over its grid."""
        inner = np.trapezoid(self.values, dx=self.pgrid.spacing, axis=1)
        return float(np.trapezoid(inner, dx=self.qgrid.spacing))


def normalize_unit(f: HusimiField) -> HusimiField:
    """Rescale a field numerically so its grid integral equals one."""
    total = f.grid_integral()
    if total <= 0.0:
        raise ValueError("cannot normalize a field with nonpositive integral")
    return HusimiField(
        qgrid=f.qgrid,
        pgrid=f.pgrid,
        values=f.values / total,
        norm_mode="unit",
        meta=dict(f.meta),
    )


def write_field_csv(f: HusimiField, path: str | Path) -> list[str]:
    """Write the field as CSV rows Q,P,value (row-major) plus a JSON sidecar.

    Returns the paths written.  17 significant digits, CRLF line endings.
    """
    path = Path(path)
    qpts = f.qgrid.points()
    ppts = f.pgrid.points()
    lines = ["Q,P,value"]
    for i, qv in enumerate(qpts):
        row = f.values[i]
        for j, pv in enumerate(ppts):
            lines.append(f"{qv:.17g},{pv:.17g},{row[j]:.17g}")
    path.write_bytes(("\r\n".join(lines) + "\r\n").encode("utf-8"))
    sidecar = path.with_suffix(".json")
    sidecar.write_text(
        json.dumps(
            {
                "qgrid": {"lo": f.qgrid.lo, "hi": f.qgrid.hi, "n": f.qgrid.n},
                "pgrid": {"lo": f.pgrid.lo, "hi": f.pgrid.hi, "n": f.pgrid.n},
                "norm_mode": f.norm_mode,
                "meta": f.meta,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    return [str(path), str(sidecar)]


# ---------------------------------------------------------------------------
# harmonic oscillator
# ---------------------------------------------------------------------------


def husimi_ho_closed(n: int, q: float, p: float, hbar: float = 1.0, mode: str = "raw"):
    """Husimi value of harmonic eigenstate n at scaled phase point (Q, P).

    raw mode: exp(-(Q^2+P^2)/2) (Q^2+P^2)^n / ((4 pi hbar) n!).  unit mode
    rescales by the analytic plane integral, giving
    exp(-(Q^2+P^2)/2) (Q^2+P^2)^n / (2 pi 2^n n!).  Assembled in log space so
    large n (e.g. n = 100) does not overflow.
    """
    if n < 0:
        raise ValueError("level n must be >= 0")
    if mode not in ("raw", "unit"):
        raise ValueError(f"unknown norm mode {mode!r}")
    scalar = np.ndim(q) == 0 and np.ndim(p) == 0
    r2 = np.atleast_1d(np.asarray(q, dtype=float) ** 2 + np.asarray(p, dtype=float) ** 2)
    if mode == "raw":
        log_norm = math.log(4.0 * math.pi * hbar) + log_gamma_fn(n + 1.0)
    else:
        log_norm = math.log(2.0 * math.pi) + n * math.log(2.0) + log_gamma_fn(n + 1.0)
    if n == 0:
        out = np.exp(-0.5 * r2 - log_norm)
    else:
        out = np.zeros_like(r2)
        pos = r2 > 0.0
        out[pos] = np.exp(-0.5 * r2[pos] + n * np.log(r2[pos]) - log_norm)
    return float(out[0]) if scalar else out


def ho_husimi_field(
    n: int, qgrid: Grid1D, pgrid: Grid1D, hbar: float = 1.0, mode: str = "unit"
) -> HusimiField:
    """Closed-form harmonic Husimi field on a (Q, P) grid."""
    qq, pp = np.meshgrid(qgrid.points(), pgrid.points(), indexing="ij")
    values = husimi_ho_closed(n, qq, pp, hbar=hbar, mode=mode)
    return HusimiField(
        qgrid=qgrid,
        pgrid=pgrid,
        values=values,
        norm_mode=mode,
        meta={"kind": "harmonic-exact", "n": n, "hbar": hbar},
    )


def ho_eigenfunction(n: int, x):
    """Orthonormal harmonic eigenfunction (Hermite function) at x, natural units.

    Three-term recurrence on the normalized functions; stable to n = 150.
    """
    if n < 0:
        raise ValueError("level n must be >= 0")
    x = np.asarray(x, dtype=float)
    psi_prev = _QUARTER_PI * np.exp(-0.5 * x * x)
    if n == 0:
        out = psi_prev
    else:
        psi = _SQRT2 * x * psi_prev
        for k in range(2, n + 1):
            psi, psi_prev = (
                math.sqrt(2.0 / k) * x * psi - math.sqrt((k - 1.0) / k) * psi_prev,
                psi,
            )
        out = psi
    return float(out) if out.ndim == 0 else out


def ho_husimi_from_wavefunction(
    n: int, q: float, p: float, tol: float = 1e-10
) -> float:
    """Unit-mode harmonic Husimi value computed by quadrature from psi_n.

    Evaluates |integral of psi_n(x) conj(chi)(x) dx|^2 / (2 pi) with the
    coherent wavefunction chi(x) = pi^(-1/4) exp(-(x - Q)^2 / 2 + i P x);
    independent of the closed form and used to cross-validate it.
    """
    lo = min(-math.sqrt(2.0 * n + 1.0) - 6.0, q - 9.0)
    hi = max(math.sqrt(2.0 * n + 1.0) + 6.0, q + 9.0)

    def integrand_re(x: float) -> float:
        g = _QUARTER_PI * math.exp(-0.5 * (x - q) ** 2)
        return ho_eigenfunction(n, x) * g * math.cos(p * x)

    def integrand_im(x: float) -> float:
        g = _QUARTER_PI * math.exp(-0.5 * (x - q) ** 2)
        return -ho_eigenfunction(n, x) * g * math.sin(p * x)

    re = integrate_1d(integrand_re, lo, hi, tol)
    im = integrate_1d(integrand_im, lo, hi, tol)
    return (re * re + im * im) / (2.0 * math.pi)


def harmonic_level_energy(n: int, omega: float = 1.0, hbar: float = 1.0) -> float:
    """Eigenenergy hbar w (n + 1/2) of harmonic level n."""
    if n < 0:
        raise ValueError("level n must be >= 0")
    return hbar * omega * (n + 0.5)


# ---------------------------------------------------------------------------
# Morse bound states
# ---------------------------------------------------------------------------


class TruncationError(RuntimeError):
    """Confluent series failed to converge within the term cap."""


def morse_eigenvalue(nu: int, system: MorseSystem) -> float:
    """Bound-state energy -D + hbar w [(nu + 1/2) - (nu + 1/2)^2 / zeta2], in J."""
    cap = (system.zeta2 - 1.0) / 2.0
    if nu < 0 or nu >= cap:
        raise ValueError(
            f"level nu = {nu} out of range: bound levels require nu < {cap}"
        )
    half = nu + 0.5
    return -system.d_well + system.hbar * system.omega_w * (
        half - half * half / system.zeta2
    )


@dataclass(frozen=True)
class MorseEigenstate:
    """Bound Morse level with the constants of its eigenfunction series.

    norm_const is the numerically fixed normalization A1 of the radial factor
    (so that the full wavefunction has unit norm with measure r^2 dr);
    support is the x interval outside which the probability density falls
    below 1e-14 of its peak.
    """

    nu: int
    system: MorseSystem
    energy: float
    beta1: float
    sigma_s: float
    a_tilde: float
    series_cap: int
    norm_const: float
    support: tuple[float, float]


def _morse_series(state_a: float, state_s: float, y, cap: int):
    """Confluent series sum_n (a)_n / (s)_n y^n / n! via the term recurrence.

    Equivalent to the printed ratio-of-gammas form but free of the poles at
    nonpositive a and of the overflow of the individual gamma factors.
    """
    y = np.asarray(y, dtype=float)
    total = np.ones_like(y)
    term = np.ones_like(y)
    tmax = 1.0
    for k in range(cap):
        term = term * ((state_a + k) / (state_s + k)) * y / (k + 1.0)
        total = total + term
        tmax = float(np.max(np.abs(term)))
        if tmax <= 1e-16 * float(np.max(np.abs(total))):
            return total
    if tmax > 1e-12 * float(np.max(np.abs(total))):
        raise TruncationError(
            f"series still has relative terms {tmax:.2e} after {cap} terms"
        )
    return total


def _morse_shape(beta1: float, zeta2: float, alpha_m: float, a_t: float, s_s: float, x, cap: int):
    """Un-normalized radial factor exp(-b1 x - (z2/2) e^(-a x)) M(a, s, z2 e^(-a x))."""
    x = np.asarray(x, dtype=float)
    y = zeta2 * np.exp(-alpha_m * x)
    out = np.exp(-beta1 * x - 0.5 * y) * _morse_series(a_t, s_s, y, cap)
    return out


def morse_eigenstate(nu: int, system: MorseSystem, series_cap: int = 500) -> MorseEigenstate:
    """Build bound level nu: eigenvalue, series constants and normalization."""
    energy = morse_eigenvalue(nu, system)
    beta1 = system.gamma_c * math.sqrt(abs(energy) / system.d_well)
    sigma_s = 2.0 * beta1 / system.alpha_m + 1.0
    a_tilde = 0.5 * sigma_s - system.gamma_c / system.alpha_m

    def density(x: float) -> float:
        return float(
            _morse_shape(beta1, system.zeta2, system.alpha_m, a_tilde, sigma_s, x, series_cap)
        ) ** 2

    # envelope peak of exp(-b1 x - (z2/2) e^(-a x)): e^(-a x) = b1/gamma
    x_peak = -math.log(beta1 / system.gamma_c) / system.alpha_m
    width = 1.0 / math.sqrt(system.sigma2)
    lo, hi = scan_support(density, x_peak, step=0.25 * width * (1.0 + nu))
    lo = max(lo, -1.0 + 1e-12)
    norm_raw = integrate_1d(density, lo, hi, tol=1e-13 * density(x_peak) + 1e-300)
    norm_const = 1.0 / math.sqrt(system.r0 * norm_raw)
    return MorseEigenstate(
        nu=nu,
        system=system,
        energy=energy,
        beta1=beta1,
        sigma_s=sigma_s,
        a_tilde=a_tilde,
        series_cap=series_cap,
        norm_const=norm_const,
        support=(lo, hi),
    )


def morse_eigenfunction(state: MorseEigenstate, x):
    """Radial factor Psi(x) of bound level nu at x = (r - r0)/r0, units m^(-1/2).

    The full wavefunction is Psi(r)/r times the trivial angular part, so
    orthonormality holds as integral of Psi_n Psi_m dr = delta_nm.  Vanishes
    double-exponentially as x -> -1 and as exp(-beta1 x) for large x.
    """
    s = state
    out = s.norm_const * _morse_shape(
        s.beta1, s.system.zeta2, s.system.alpha_m, s.a_tilde, s.sigma_s, x, s.series_cap
    )
    return float(out) if np.ndim(out) == 0 else out


def morse_husimi(state: MorseEigenstate, rpos: float, pmom: float, tol: float = 1e-9) -> float:
    """Exact Husimi value of a Morse bound state at dimensionless (r/r0, p r0/hbar).

    Overlap of the state with a minimum-uncertainty state of width
    dx = sqrt(hbar / (2 mu w)) centred at r = rpos r0 with radial momentum
    pmom hbar / r0.  The angular part of the 3-D overlap integrates to
    (image-corrected) sinh(k r)/(k r) with the complex constant
    k = rpos r0 / (2 dx^2) - i pmom / r0; here it is folded into the radial
    quadrature in overflow-safe form.  Symmetric under pmom -> -pmom.
    """
    if rpos <= 0.0:
        raise ValueError("rpos = r/r0 must be > 0")
    sys_ = state.system
    sig2 = sys_.sigma2
    kappa = sig2 * rpos - 1j * pmom
    prefactor = 4.0 * sig2 ** 1.5 / math.sqrt(math.pi)
    norm_tilde = state.norm_const * math.sqrt(sys_.r0)  # dimensionless shape scale

    # Gaussian factor restricts u = 1 + x to rpos +- 8/sigma; intersect with the
    # eigenfunction support.
    half = 8.0 / math.sqrt(sig2)
    lo = max(state.support[0], rpos - 1.0 - half)
    hi = min(state.support[1], rpos + 1.0 + half)
    if lo >= hi:
        return 0.0

    def kernel(x: float) -> complex:
        u = 1.0 + x
        direct = -0.5 * sig2 * (u - rpos) ** 2
        image = -0.5 * sig2 * (u + rpos) ** 2
        osc = pmom * u
        ph = complex(math.cos(osc), -math.sin(osc))
        return (math.exp(direct) * ph - math.exp(image) * ph.conjugate()) / (2.0 * kappa)

    def f_re(x: float) -> float:
        psi = norm_tilde * float(
            _morse_shape(
                state.beta1,
                sys_.zeta2,
                sys_.alpha_m,
                state.a_tilde,
                state.sigma_s,
                x,
                state.series_cap,
            )
        )
        return psi * kernel(x).real

    def f_im(x: float) -> float:
        psi = norm_tilde * float(
            _morse_shape(
                state.beta1,
                sys_.zeta2,
                sys_.alpha_m,
                state.a_tilde,
                state.sigma_s,
                x,
                state.series_cap,
            )
        )
        return psi * kernel(x).imag

    re = integrate_1d(f_re, lo, hi, tol)
    im = integrate_1d(f_im, lo, hi, tol)
    return prefactor * (re * re + im * im)


# ---------------------------------------------------------------------------
# semiclassical (orbit-averaged) Husimi
# ---------------------------------------------------------------------------


def _time_average_field(
    label_path: np.ndarray, beta_grid: np.ndarray
) -> np.ndarray:
    """Mean over the path samples of exp(-|alpha(t) - beta|^2) on the grid."""
    acc = np.zeros(beta_grid.shape, dtype=float)
    for alpha in label_path:
        d2 = np.abs(alpha - beta_grid) ** 2
        acc += np.exp(-d2)
    return acc / len(label_path)


def sc_husimi(
    orbit_energy: float,
    system: HarmonicSpec | MorseSystem,
    qgrid: Grid1D,
    pgrid: Grid1D,
    period_samples: int = 2048,
    norm_mode: str = "unit",
    t0_offset: float = 0.0,
) -> HusimiField:
    """Semiclassical Husimi field: time average of exp(-|alpha(t) - beta|^2).

    The label alpha(t) runs along the closed classical orbit, sampled
    uniformly over exactly one period (period_samples points, optionally
    started at t0_offset, which cannot change the average).

    Harmonic: the grid is the scaled (Q, P) chart; orbit_energy is the
    eigenenergy hbar w (n + 1/2) and the orbit is the circle of the coherent
    state with that mean energy, radius |alpha| = sqrt(n); the level-0 orbit
    degenerates to a point and the field reduces to the exact ground-state
    Husimi.  Morse: the grid is dimensionless (r/r0, p r0/hbar) and the orbit
    is the closed-form bound trajectory at orbit_energy [J].

    Driven (non-periodic) systems are rejected: the time average needs a
    period.  Unit normalization is analytic (/ 2 pi) for the harmonic case
    and numeric over the grid for Morse.
    """
    if period_samples < 4:
        raise ValueError("period_samples must be >= 4")
    if norm_mode not in ("raw", "unit"):
        raise ValueError(f"unknown norm mode {norm_mode!r}")

    qq, pp = np.meshgrid(qgrid.points(), pgrid.points(), indexing="ij")

    if isinstance(system, HarmonicSpec):
        # coherent state with mean energy orbit_energy: |alpha|^2 = E/(hbar w) - 1/2
        n_eff = orbit_energy / system.omega - 0.5
        if n_eff < -1e-9:
            raise ValueError("orbit energy below the ground level")
        radius_q = math.sqrt(2.0 * max(n_eff, 0.0))
        period = 2.0 * math.pi / system.omega
        t = t0_offset + period * np.arange(period_samples) / period_samples
        phase = system.omega * t
        labels = (radius_q * np.cos(phase) - 1j * radius_q * np.sin(phase)) / _SQRT2
        beta_grid = (qq + 1j * pp) / _SQRT2
        values = _time_average_field(labels, beta_grid)
        if norm_mode == "unit":
            values = values / (2.0 * math.pi)
        meta = {"kind": "harmonic-semiclassical", "orbit_energy": orbit_energy,
                "omega": system.omega, "period_samples": period_samples}
        return HusimiField(qgrid, pgrid, values, norm_mode, meta)

    if isinstance(system, MorseSystem):
        u, ptil = morse_orbit(orbit_energy, system, period_samples, t0_offset)
        sigma = math.sqrt(system.sigma2)
        labels = (sigma * u + 1j * ptil / sigma) / _SQRT2
        beta_grid = (sigma * qq + 1j * pp / sigma) / _SQRT2
        values = _time_average_field(labels, beta_grid)
        meta = {
            "kind": "morse-semiclassical",
            "orbit_energy": orbit_energy,
            "period": morse_period(orbit_energy, system),
            "period_samples": period_samples,
        }
        out = HusimiField(qgrid, pgrid, values, "raw", meta)
        return normalize_unit(out) if norm_mode == "unit" else out

    raise ValueError(
        f"no closed orbit for system {system!r}: time averaging requires a period"
    )

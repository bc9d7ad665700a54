"""Coherent-state labels and overlaps.

A label is a plain complex number alpha = (Q + iP) / sqrt(2), where (Q, P) is
the phase-space point in oscillator-scaled coordinates Q = q sqrt(m w / hbar),
P = p / sqrt(m w hbar).  Labels are dimensionless; physical (q, p) enters only
through an OscillatorScale.  All functions accept scalars or numpy arrays and
are pure (thread-safe).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "OscillatorScale",
    "NATURAL_SCALE",
    "alpha_from_qp",
    "qp_from_alpha",
    "overlap_h3",
    "overlap_su2_sq",
    "distance0",
]


@dataclass(frozen=True)
class OscillatorScale:
    """Mass, frequency and hbar fixing the (q, p) <-> label map."""

    mass: float = 1.0
    omega: float = 1.0
    hbar: float = 1.0

    def __post_init__(self) -> None:
        for name in ("mass", "omega", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")


NATURAL_SCALE = OscillatorScale()


def alpha_from_qp(q, p, scale: OscillatorScale = NATURAL_SCALE):
    """Label alpha for phase-space point (q, p)."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
        raise ValueError("q and p must be finite")
    cq = math.sqrt(scale.mass * scale.omega / (2.0 * scale.hbar))
    cp = 1.0 / math.sqrt(2.0 * scale.mass * scale.omega * scale.hbar)
    out = q * cq + 1j * (p * cp)
    return complex(out) if out.ndim == 0 else out


def qp_from_alpha(alpha, scale: OscillatorScale = NATURAL_SCALE):
    """Inverse of alpha_from_qp; returns (q, p)."""
    alpha = np.asarray(alpha, dtype=complex)
    cq = math.sqrt(scale.mass * scale.omega / (2.0 * scale.hbar))
    cp = 1.0 / math.sqrt(2.0 * scale.mass * scale.omega * scale.hbar)
    q = alpha.real / cq
    p = alpha.imag / cp
    if alpha.ndim == 0:
        return float(q), float(p)
    return q, p


def overlap_h3(a, b):
    """Inner product <a|b> of two harmonic (Weyl-Heisenberg) coherent states.

    Returns the full complex Glauber value exp(-|a|^2/2 - |b|^2/2 + conj(a) b);
    its squared modulus is exp(-|a - b|^2).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    out = np.exp(-0.5 * (np.abs(a) ** 2 + np.abs(b) ** 2) + np.conj(a) * b)
    return complex(out) if out.ndim == 0 else out


def overlap_su2_sq(a, b, j: float):
    """Squared overlap of two spin-J (su(2)) coherent states, stereographic labels.

    [1 - |a-b|^2 / ((1+|a|^2)(1+|b|^2))]^(2J); lies in [0, 1].  With both
    labels rescaled by 1/sqrt(2J) this converges to the harmonic law
    exp(-|a-b|^2) as J grows.
    """
    if not j > 0.0:
        raise ValueError("J must be > 0")
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    base = 1.0 - np.abs(a - b) ** 2 / ((1.0 + np.abs(a) ** 2) * (1.0 + np.abs(b) ** 2))
    # base >= 0 analytically; clip rounding residue at a == b boundary cases
    base = np.clip(base, 0.0, 1.0)
    out = base ** (2.0 * j)
    return float(out) if out.ndim == 0 else out


def distance0(
    q: float, p: float, q2: float, p2: float, scale: OscillatorScale = NATURAL_SCALE
) -> float:
    """Initial phase-space distance D0 of two points in canonical coordinates.

    D0^2 = sqrt(1/(hbar w)) [m w^2 (q-q2)^2 / 2 + (p-p2)^2 / (2m)]; in natural
    units (m = w = hbar = 1) this equals the squared label distance |a - b|^2.
    """
    dq = float(q) - float(q2)
    dp = float(p) - float(p2)
    m, w, hb = scale.mass, scale.omega, scale.hbar
    d0_sq = math.sqrt(1.0 / (hb * w)) * (0.5 * m * w * w * dq * dq + dp * dp / (2.0 * m))
    return math.sqrt(d0_sq)

"""Coherent-state dynamics toolkit.

Classical-label evolution of coherent states and the scalar products built on
it: overlap decay of neighbouring states, exact and orbit-averaged Husimi
distributions (harmonic and Morse), Gaussian fidelity decay under a linear
perturbation, and short-time Lyapunov estimation from twin trajectories.
"""

from . import cli, coherent, dynamics, husimi, metrics, numkit, semiclassical

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "numkit",
    "coherent",
    "dynamics",
    "semiclassical",
    "husimi",
    "metrics",
    "cli",
]

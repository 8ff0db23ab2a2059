"""Semiclassical transmission through a symmetric double barrier.

Path-sum amplitudes with generalized connection formulas, an exact
transfer-matrix oracle, and Bessel sideband spectra for a driven well.
Units: hbar = 2m = 1.
"""
from .core import BarrierSystem, KinematicState, kinematics
from .oracle import PiecewisePotential, exact_transmission, from_double_barrier
from .pathsum import TransmissionResult, find_resonances, transmission

__version__ = "0.1.0"

__all__ = [
    "BarrierSystem",
    "KinematicState",
    "PiecewisePotential",
    "TransmissionResult",
    "exact_transmission",
    "find_resonances",
    "from_double_barrier",
    "kinematics",
    "transmission",
]

"""Barrier geometry and energy-dependent kinematics.

Units: hbar = 2m = 1, so that k = sqrt(E) and q = sqrt(V0 - E).  Energies,
lengths and wavenumbers are all dimensionless in this convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EnergyOutOfRange

#: energies closer than this fraction of V0 to 0 or V0 are rejected
EDGE_TOL = 1e-12


@dataclass(frozen=True)
class BarrierSystem:
    """Symmetric double rectangular barrier.

    Two barriers of height ``v0`` and width ``w`` enclose a field-free well
    of width ``d``.
    """

    v0: float
    w: float
    d: float

    def __post_init__(self):
        for name in ("v0", "w", "d"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")


@dataclass(frozen=True)
class KinematicState:
    e: float
    k: float
    q: float
    theta: float
    l_phase: float
    dk_de: float
    dq_de: float


def check_energy(system: BarrierSystem, e: float) -> None:
    tol = EDGE_TOL * system.v0
    if not (math.isfinite(e) and tol < e < system.v0 - tol):
        raise EnergyOutOfRange(
            f"energy {e!r} outside the tunneling window (0, {system.v0!r})"
        )


def kinematics(system: BarrierSystem, e: float) -> KinematicState:
    """All energy-dependent scalars at energy ``e``.

    >>> s = kinematics(BarrierSystem(v0=2.0, w=1.0, d=1.0), 1.0)
    >>> (s.k, s.q, s.theta, s.l_phase)
    (1.0, 1.0, 1.0, 1.0)
    """
    check_energy(system, e)
    k = math.sqrt(e)
    q = math.sqrt(system.v0 - e)
    return KinematicState(
        e=e,
        k=k,
        q=q,
        theta=q * system.w,
        l_phase=k * system.d,
        dk_de=0.5 / k,
        dq_de=-0.5 / q,
    )


def finite_difference_derivatives(system: BarrierSystem, e: float, h: float) -> tuple[float, float]:
    """Central-difference estimates of (dk/dE, dq/dE)."""
    if not h > 0:
        raise ValueError("step h must be positive")
    lo = kinematics_or_raise(system, e - h)
    hi = kinematics_or_raise(system, e + h)
    return (hi.k - lo.k) / (2 * h), (hi.q - lo.q) / (2 * h)


def kinematics_or_raise(system, e):
    try:
        return kinematics(system, e)
    except EnergyOutOfRange as exc:
        raise EnergyOutOfRange(f"finite-difference stencil leaves (0, V0): {exc}") from None

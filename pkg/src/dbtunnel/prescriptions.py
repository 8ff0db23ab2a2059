"""Turning-point connection prescriptions and their path-sum factors.

A prescription is the quadruple (N, N_bar, phi, phi_bar).  The path-sum
picks up one complex factor (phase times weight) every time a path meets a
turning point; :func:`turning_point_factor` tabulates those factors.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from .core import KinematicState


class PrescriptionKind(str, enum.Enum):
    ELTSCHKA = "eltschka"
    AOYAMA_HARANO = "aoyama-harano"
    CONVENTIONAL_WKB = "wkb"
    CUSTOM = "custom"


class Transition(enum.Enum):
    ALLOWED_TO_ALLOWED = "allowed->allowed"
    FORBIDDEN_TO_FORBIDDEN = "forbidden->forbidden"
    FORBIDDEN_TO_ALLOWED = "forbidden->allowed"
    ALLOWED_TO_FORBIDDEN = "allowed->forbidden"


@dataclass(frozen=True)
class ConnectionPrescription:
    n_amp: float
    n_bar_amp: float
    phi: float
    phi_bar: float
    kind: PrescriptionKind = PrescriptionKind.CUSTOM

    def __post_init__(self):
        if not (self.n_amp > 0 and self.n_bar_amp > 0):
            raise ValueError("amplitude factors N and N_bar must be positive")


def eltschka(state: KinematicState) -> ConnectionPrescription:
    """Energy-dependent prescription that is exact for a rectangular barrier."""
    k, q = state.k, state.q
    n = 2.0 * math.sqrt(k * q / (k * k + q * q))
    phi = 2.0 * math.atan2(q, k)
    return ConnectionPrescription(n, 0.5 * n, phi, -phi, PrescriptionKind.ELTSCHKA)


def aoyama_harano() -> ConnectionPrescription:
    return ConnectionPrescription(1.0, 1.0, math.pi / 4, -math.pi / 4, PrescriptionKind.AOYAMA_HARANO)


def conventional_wkb() -> ConnectionPrescription:
    return ConnectionPrescription(1.0, 1.0, math.pi / 2, -math.pi / 2, PrescriptionKind.CONVENTIONAL_WKB)


def prescription_for(kind: str | PrescriptionKind, state: KinematicState) -> ConnectionPrescription:
    """Resolve a kind name (as accepted by ``--prescription``) at ``state``."""
    kind = PrescriptionKind(kind)
    if kind is PrescriptionKind.ELTSCHKA:
        return eltschka(state)
    if kind is PrescriptionKind.AOYAMA_HARANO:
        return aoyama_harano()
    if kind is PrescriptionKind.CONVENTIONAL_WKB:
        return conventional_wkb()
    raise ValueError("custom prescriptions must be constructed explicitly")


def consistency_residual(p: ConnectionPrescription) -> float:
    """N * N_bar - sin((phi - phi_bar) / 2); zero for a consistent prescription."""
    return p.n_amp * p.n_bar_amp - math.sin(0.5 * (p.phi - p.phi_bar))


def turning_point_factor(p: ConnectionPrescription, t: Transition) -> complex:
    if t is Transition.ALLOWED_TO_ALLOWED:
        return cmath.exp(-1j * p.phi)
    if t is Transition.FORBIDDEN_TO_FORBIDDEN:
        return -cmath.exp(-0.5j * (p.phi - p.phi_bar)) * (p.n_amp / (2.0 * p.n_bar_amp))
    if t is Transition.FORBIDDEN_TO_ALLOWED:
        return 1j * cmath.exp(-0.5j * p.phi) * p.n_amp
    if t is Transition.ALLOWED_TO_FORBIDDEN:
        return cmath.exp(-0.5j * p.phi) * p.n_amp
    raise TypeError(f"unknown transition {t!r}")

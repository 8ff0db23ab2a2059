"""Semiclassical path-sum transmission through the double barrier.

Regions are numbered 0..4 from left to right: lead, barrier, well, barrier,
lead.  ``T_ij`` is the amplitude to enter region i and emerge into region j
using paths confined to region i; ``B_ij`` additionally allows re-entry.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import BarrierSystem, KinematicState, check_energy, kinematics
from .errors import AtResonance, DivergentSeries, EnergyOutOfRange, NotAtResonance, SingularPhase
from .prescriptions import (
    ConnectionPrescription,
    PrescriptionKind,
    Transition,
    aoyama_harano,
    eltschka,
    prescription_for,
    turning_point_factor,
)

SINGULAR_SIN_PHI = 1e-12


class Regime(str, enum.Enum):
    OFF_RESONANCE = "off-resonance"
    RESONANCE = "resonance"


class Method(str, enum.Enum):
    CLOSED_FORM = "semiclassical-closed-form"
    COMPOSED = "semiclassical-composed"
    RESONANCE_MIXED = "resonance-mixed"
    EXACT = "exact-oracle"


@dataclass(frozen=True)
class TransmissionResult:
    amplitude: complex
    probability: float
    regime: Regime
    method: Method


def _result(amplitude, regime, method):
    return TransmissionResult(complex(amplitude), abs(amplitude) ** 2, regime, method)


@dataclass(frozen=True)
class RegionAmplitudes:
    """Region-to-region amplitudes.

    ``b23`` and ``b21`` solve the four coupled re-entry equations exactly;
    ``b_sum`` is the truncated closed form used by the composed
    transmission, correct up to O(exp(-4 theta)) relative to ``b23 + b21``.
    """

    t12: complex
    t12_minus: complex
    t21: complex
    t23: complex
    b23: complex
    b21: complex
    b_sum: complex


def well_detuning(state: KinematicState, p: ConnectionPrescription) -> float:
    """L - phi; resonances sit at integer multiples of 2 pi."""
    return state.l_phase - p.phi


def is_resonant(state: KinematicState, p: ConnectionPrescription) -> bool:
    """True where the resonant denominator term of the closed form dominates.

    The closed form has two denominator terms, ``exp(i(L-phi))/sin(phi)`` and
    one proportional to ``sin(L-phi) sinh(2 theta)``; they swap dominance at
    ``|sin(L-phi)| sinh(2 theta) = 1``.
    """
    return abs(math.sin(well_detuning(state, p))) * math.sinh(2.0 * state.theta) <= 1.0


def single_barrier_amplitude(state: KinematicState, p: ConnectionPrescription) -> complex:
    """Transmission amplitude across one barrier, summed over internal bounces."""
    if not state.theta > 0:
        raise ValueError("theta must be positive")
    enter = turning_point_factor(p, Transition.ALLOWED_TO_FORBIDDEN)
    leave = turning_point_factor(p, Transition.FORBIDDEN_TO_ALLOWED)
    bounce = turning_point_factor(p, Transition.FORBIDDEN_TO_FORBIDDEN) * math.exp(-state.theta)
    if abs(bounce) >= 1.0:
        raise DivergentSeries(f"internal bounce ratio |{bounce:.6g}| >= 1")
    return enter * math.exp(-state.theta) * leave / (1.0 - bounce * bounce)


def _well_round_trip_sum(state, p):
    # sum over n of (exp(-i phi) exp(iL))^(2n), closed form for |ratio| = 1
    alpha = well_detuning(state, p)
    if abs(math.sin(alpha)) * math.sinh(2.0 * state.theta) <= 1.0:
        raise AtResonance(f"sin(L - phi) = {math.sin(alpha):.3e} is too close to zero")
    return 1.0 / (-2j * math.sin(alpha) * cmath.exp(1j * alpha))


def region_amplitudes(state: KinematicState, p: ConnectionPrescription) -> RegionAmplitudes:
    theta, big_l = state.theta, state.l_phase
    alpha = well_detuning(state, p)
    enter = turning_point_factor(p, Transition.ALLOWED_TO_FORBIDDEN)
    leave = turning_point_factor(p, Transition.FORBIDDEN_TO_ALLOWED)
    bounce = turning_point_factor(p, Transition.FORBIDDEN_TO_FORBIDDEN)
    reflect = turning_point_factor(p, Transition.ALLOWED_TO_ALLOWED)

    t12 = single_barrier_amplitude(state, p)
    t12_minus = bounce * math.exp(-theta) * t12
    t21 = leave * reflect * cmath.exp(2j * big_l) * _well_round_trip_sum(state, p) * enter
    t23 = cmath.exp(-1j * alpha) * t21
    t34, t32 = t12, t12_minus

    # each interface factor is counted once by the T on either side
    c = 1.0 / enter
    u = cmath.exp(1j * alpha)
    a = t23 * c * t32 * c
    b = t21 * c * t12_minus * c
    lhs = np.array([[1.0 - a * u, -a / u], [-b, 1.0 - b]], dtype=complex)
    rhs = np.array([t23 * c * t34, 0.0], dtype=complex)
    b23, b21 = np.linalg.solve(lhs, rhs)

    correction = (p.n_amp / p.n_bar_amp) * math.exp(-theta) * u / p.n_amp**2
    b_sum = c / (1.0 / (t23 * t34) + correction)
    return RegionAmplitudes(t12, t12_minus, t21, t23, complex(b23), complex(b21), b_sum)


def composed_amplitude(state: KinematicState, p: ConnectionPrescription) -> complex:
    """T = T12 * (1 / N exp(-i phi / 2)) * (B23 + B21) with the truncated B sum."""
    ra = region_amplitudes(state, p)
    return ra.t12 / turning_point_factor(p, Transition.ALLOWED_TO_FORBIDDEN) * ra.b_sum


def transmission_composed(state: KinematicState, p: ConnectionPrescription) -> TransmissionResult:
    return _result(composed_amplitude(state, p), Regime.OFF_RESONANCE, Method.COMPOSED)


def transmission_off_resonance(state: KinematicState, p: ConnectionPrescription) -> TransmissionResult:
    """Simplified closed-form amplitude, valid away from resonance."""
    sin_phi = math.sin(p.phi)
    if abs(sin_phi) < SINGULAR_SIN_PHI:
        raise SingularPhase(f"sin(phi) = {sin_phi:.3e}")
    alpha = well_detuning(state, p)
    _well_round_trip_sum(state, p)  # raises AtResonance
    sh, ch = math.sinh(state.theta), math.cosh(state.theta)
    cot_phi = math.cos(p.phi) / sin_phi
    denom = (cmath.exp(1j * alpha) / sin_phi
             - 2.0 * (sh / sin_phi) * math.sin(alpha) * (ch - 1j * cot_phi * sh))
    return _result(-1j / denom, Regime.OFF_RESONANCE, Method.CLOSED_FORM)


def resonance_residual(state: KinematicState, p: ConnectionPrescription) -> float:
    """1 - cos L - tan(phi/2) sin L, with tan(phi/2) = q/k for the exact prescription.

    Vanishes at the even-parity resonances L - phi = 2 pi n, and also at the
    spurious points L = 2 pi n where sin(L/2) vanishes.
    """
    big_l = state.l_phase
    return 1.0 - math.cos(big_l) - _half_angle_tan(state, p) * math.sin(big_l)


def odd_resonance_residual(state: KinematicState, p: ConnectionPrescription) -> float:
    """1 + cos L + tan(phi/2) sin L, the odd-parity (L - phi = pi + 2 pi n) counterpart."""
    big_l = state.l_phase
    return 1.0 + math.cos(big_l) + _half_angle_tan(state, p) * math.sin(big_l)


def _half_angle_tan(state, p):
    if p.kind is PrescriptionKind.ELTSCHKA:
        return state.q / state.k
    return math.tan(0.5 * p.phi)


def resonance_parity(state: KinematicState, p: ConnectionPrescription) -> str:
    return "even" if math.cos(well_detuning(state, p)) >= 0.0 else "odd"


def _bisect(fn, lo, hi, flo):
    # run to adjacent floats; the residual is cheap
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return lo if abs(fn(lo)) <= abs(fn(hi)) else hi


def _polish(system, kind, e, span=64):
    # pick the representable energy with the smallest computed |sin(L - phi)|
    best, best_val = e, math.inf
    cand = e
    for _ in range(span):
        cand = math.nextafter(cand, -math.inf)
    for _ in range(2 * span + 1):
        try:
            state = kinematics(system, cand)
        except EnergyOutOfRange:
            cand = math.nextafter(cand, math.inf)
            continue
        val = abs(math.sin(well_detuning(state, prescription_for(kind, state))))
        if val < best_val:
            best, best_val = cand, val
        cand = math.nextafter(cand, math.inf)
    return best


def _branch_roots(residual, grid):
    values = [residual(float(e)) for e in grid]
    roots = []
    for i in range(len(grid) - 1):
        lo, hi, flo, fhi = float(grid[i]), float(grid[i + 1]), values[i], values[i + 1]
        if flo == 0.0:
            roots.append(lo)
        elif fhi != 0.0 and (flo < 0) != (fhi < 0):
            roots.append(_bisect(residual, lo, hi, flo))
    if values[-1] == 0.0:
        roots.append(float(grid[-1]))
    # tangential zeros: |residual| dips below threshold without a sign change
    for i in range(1, len(grid) - 1):
        a, b, c = values[i - 1], values[i], values[i + 1]
        if abs(b) <= abs(a) and abs(b) <= abs(c) and (a < 0) == (c < 0) and (a < 0) == (b < 0):
            lo, hi = float(grid[i - 1]), float(grid[i + 1])
            e_star = _golden_min(lambda e: abs(residual(e)), lo, hi, 0.0)
            if abs(residual(e_star)) < 1e-10:
                roots.append(e_star)
    return roots


def find_resonances(system: BarrierSystem, p_kind, e_min: float, e_max: float,
                    grid_n: int = 2001, parity: str = "all") -> list[float]:
    """Resonance energies (sin(L - phi) = 0) in [e_min, e_max], sorted ascending.

    Even-parity roots come from :func:`resonance_residual`, odd-parity ones
    from :func:`odd_resonance_residual`; ``parity`` selects "even", "odd" or
    "all".  Roots are bisected down to adjacent floats and then moved to the
    neighbouring representable energy with the smallest |sin(L - phi)|.
    """
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    if parity not in ("all", "even", "odd"):
        raise ValueError(f"unknown parity {parity!r}")
    if not e_min < e_max:
        raise EnergyOutOfRange("e_min must be smaller than e_max")
    check_energy(system, e_min)
    check_energy(system, e_max)

    def branch(fn):
        def residual(e):
            state = kinematics(system, e)
            return fn(state, prescription_for(p_kind, state))
        return residual

    grid = np.linspace(e_min, e_max, grid_n)
    candidates = []
    if parity in ("all", "even"):
        candidates += [(e, "even") for e in _branch_roots(branch(resonance_residual), grid)]
    if parity in ("all", "odd"):
        candidates += [(e, "odd") for e in _branch_roots(branch(odd_resonance_residual), grid)]

    kept = []
    for e, want in sorted(candidates):
        e = _polish(system, p_kind, e)
        state = kinematics(system, e)
        p = prescription_for(p_kind, state)
        # spurious zeros of the factorised residuals sit at sin(L/2) = 0 or cos(L/2) = 0
        if abs(math.sin(well_detuning(state, p))) > 1e-6 or resonance_parity(state, p) != want:
            continue
        if kept and abs(e - kept[-1]) < 1e-9 * system.v0:
            continue
        kept.append(e)
    return kept


def _golden_min(fn, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = fn(d)
        if not lo < c < d < hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ResonanceTerms:
    """Intermediate quantities of the resonance resummation, kept for inspection."""

    dressed_reflection: complex
    truncated_round_trip: complex
    resummed: complex
    amplitude: complex


def resonance_terms(state: KinematicState, inner: ConnectionPrescription | None = None,
                    outer: ConnectionPrescription | None = None) -> ResonanceTerms:
    """Resummed well oscillation with tunneling excursions into the barriers.

    ``inner`` supplies the factors at the well-facing turning points (exact
    rectangular prescription by default); ``outer`` supplies the lead-facing
    ones (Aoyama-Harano by default).
    """
    inner = inner if inner is not None else eltschka(state)
    outer = outer if outer is not None else aoyama_harano()
    theta, big_l = state.theta, state.l_phase
    alpha = big_l - inner.phi
    enter = turning_point_factor(inner, Transition.ALLOWED_TO_FORBIDDEN)
    leave = turning_point_factor(inner, Transition.FORBIDDEN_TO_ALLOWED)
    bare = turning_point_factor(inner, Transition.ALLOWED_TO_ALLOWED)
    damp = math.exp(-theta)

    # excursion into a barrier and back, reflected at its outer face
    excursion = enter * damp * 0.5j * damp * leave
    dressed = bare + excursion
    relative = excursion / bare  # -N^2 exp(-2 theta) / 2, kept apart to avoid cancellation
    # square of the dressed round trip, truncated at first order in exp(-2 theta)
    round_trip = cmath.exp(2j * alpha) * (1.0 + 2.0 * relative)
    # 1 - round_trip, rewritten so that no O(1) terms cancel near alpha = 0
    denom = -2j * math.sin(alpha) * cmath.exp(1j * alpha) - 2.0 * relative * cmath.exp(2j * alpha)
    resummed = cmath.exp(1j * big_l) / denom

    lead_in = cmath.exp(-1j * outer.phi) * outer.n_amp * damp
    lead_out = damp * outer.n_amp * cmath.exp(1j * outer.phi)
    amplitude = lead_in * leave * resummed * enter * lead_out
    return ResonanceTerms(dressed, round_trip, resummed, amplitude)


def transmission_at_resonance(state: KinematicState, inner: ConnectionPrescription | None = None,
                              outer: ConnectionPrescription | None = None) -> TransmissionResult:
    inner_p = inner if inner is not None else eltschka(state)
    if not is_resonant(state, inner_p):
        alpha = well_detuning(state, inner_p)
        raise NotAtResonance(f"sin(L - phi) = {math.sin(alpha):.3e} is outside the resonance window")
    amp = resonance_terms(state, inner_p, outer).amplitude
    return _result(amp, Regime.RESONANCE, Method.RESONANCE_MIXED)


def transmission(system: BarrierSystem, e: float, p_kind="eltschka") -> TransmissionResult:
    """Semiclassical transmission with automatic regime selection."""
    state = kinematics(system, e)
    p = prescription_for(p_kind, state)
    if is_resonant(state, p):
        return transmission_at_resonance(state, inner=p)
    return transmission_off_resonance(state, p)

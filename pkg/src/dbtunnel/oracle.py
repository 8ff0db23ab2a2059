"""Exact transmission through piecewise-constant potentials (transfer matrices).

Kept free of any helper shared with :mod:`dbtunnel.pathsum` so that the two
routes cannot share an error.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import BarrierSystem
from .errors import EnergyOutOfRange, NumericalOverflow
from .pathsum import Method, Regime, TransmissionResult

# log of the largest growth factor we are willing to carry
_MAX_LOG_SCALE = 700.0
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class PiecewisePotential:
    """Segments ``(length, height)`` between two zero-potential leads."""

    segments: tuple = field(default_factory=tuple)

    def __post_init__(self):
        segs = tuple((float(l), float(h)) for l, h in self.segments)
        for length, _ in segs:
            if not length > 0:
                raise ValueError(f"segment length must be positive, got {length!r}")
        object.__setattr__(self, "segments", segs)

    def reversed(self) -> "PiecewisePotential":
        return PiecewisePotential(tuple(reversed(self.segments)))

    @property
    def total_length(self) -> float:
        return sum(l for l, _ in self.segments)


def from_double_barrier(system: BarrierSystem) -> PiecewisePotential:
    return PiecewisePotential(((system.w, system.v0), (system.d, 0.0), (system.w, system.v0)))


@dataclass(frozen=True)
class ScatteringAmplitudes:
    t: complex
    r: complex

    @property
    def flux_defect(self) -> float:
        return abs(self.t) ** 2 + abs(self.r) ** 2 - 1.0


def _shift_off_thresholds(pot, e):
    heights = [h for _, h in pot.segments]
    scale = max([abs(h) for h in heights] + [e])
    for h in heights:
        if abs(e - h) <= 1e-12 * scale:
            shifted = e + 1e-9 * scale
            warnings.warn(f"energy {e!r} coincides with a segment height; shifted to {shifted!r}",
                          RuntimeWarning, stacklevel=3)
            return shifted
    return e


def scattering_amplitudes(pot: PiecewisePotential, e: float) -> ScatteringAmplitudes:
    """Transmission and reflection amplitudes for a wave incident from the left.

    Plane-wave coefficients (A, B) of exp(+i kappa x), exp(-i kappa x) are
    carried from the left lead to the right lead, each region using its own
    local coordinate.  Growth exp(q l) in forbidden segments is factored out
    into a running log scale.
    """
    if not (math.isfinite(e) and e > 0):
        raise EnergyOutOfRange(f"energy must be positive, got {e!r}")
    e = _shift_off_thresholds(pot, e)

    k_lead = complex(math.sqrt(e))
    m = np.eye(2, dtype=complex)
    log_scale = 0.0
    kappa_prev = k_lead
    for length, height in pot.segments:
        kappa = np.sqrt(complex(e - height))
        m = _interface(kappa_prev, kappa) @ m
        m, grow = _propagate(kappa, length, m)
        log_scale += grow
        if log_scale > _MAX_LOG_SCALE:
            raise NumericalOverflow(f"transfer matrix growth exp({log_scale:.1f}) is not representable")
        kappa_prev = kappa
    m = _interface(kappa_prev, k_lead) @ m

    # (t, 0) = M (1, r); det M = 1 for identical leads
    r = -m[1, 0] / m[1, 1]
    t = math.exp(-log_scale) / m[1, 1]
    return ScatteringAmplitudes(complex(t), complex(r))


def _interface(ka, kb):
    rho = ka / kb
    return 0.5 * np.array([[1 + rho, 1 - rho], [1 - rho, 1 + rho]], dtype=complex)


def _propagate(kappa, length, m):
    phase = 1j * kappa * length
    if kappa.imag > 0:
        # evanescent: exp(i kappa l) = exp(-q l) decays, exp(-i kappa l) grows
        grow = (kappa.imag) * length
        prop = np.diag([np.exp(phase - grow), np.exp(-phase - grow)])
        return prop @ m, grow
    prop = np.diag([np.exp(phase), np.exp(-phase)])
    return prop @ m, 0.0


def exact_transmission(pot: PiecewisePotential, e: float) -> TransmissionResult:
    amps = scattering_amplitudes(pot, e)
    if abs(amps.flux_defect) > 1e-8:
        warnings.warn(f"flux conservation violated by {amps.flux_defect:.3e}", RuntimeWarning, stacklevel=2)
    return TransmissionResult(amps.t, abs(amps.t) ** 2, Regime.OFF_RESONANCE, Method.EXACT)


def transmission_probability(pot: PiecewisePotential, e: float) -> float:
    return abs(scattering_amplitudes(pot, e).t) ** 2


def _golden_max(fn, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc > fd:
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


def exact_peak_positions(pot: PiecewisePotential, e_min: float, e_max: float,
                         grid_n: int = 2001, tol: float = 1e-12) -> list[float]:
    """Local maxima of |t|^2(E) in (e_min, e_max), refined by golden section."""
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    if not (0 < e_min < e_max):
        raise EnergyOutOfRange(f"need 0 < e_min < e_max, got ({e_min!r}, {e_max!r})")
    grid = np.linspace(e_min, e_max, grid_n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        values = [transmission_probability(pot, float(e)) for e in grid]
        peaks = []
        for i in range(1, grid_n - 1):
            if values[i] >= values[i - 1] and values[i] > values[i + 1]:
                lo, hi = float(grid[i - 1]), float(grid[i + 1])
                peaks.append(_golden_max(lambda e: transmission_probability(pot, e), lo, hi, tol))
    return peaks

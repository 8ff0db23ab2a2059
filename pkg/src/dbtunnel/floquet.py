"""Sidebands of resonant transmission through a harmonically driven well.

A well oscillating as V1 cos(omega t) exchanges quanta hbar*omega with the
particle.  Sideband weights are Bessel functions of f = V1 / (hbar omega);
at resonance the self-consistent incident distribution is J_n(gamma f), and
every sideband is quenched simultaneously at the zeros of J_n(gamma f).
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import BarrierSystem, KinematicState
from .errors import NotAtResonance, OutOfEnvelope, SingularPhase
from .pathsum import is_resonant
from .prescriptions import eltschka

MAX_ORDER = 200
MAX_ARG = 100.0
# heuristic limit of the first-order expansion in hbar*omega
OMEGA_WARN_FRACTION = 0.05


# --------------------------------------------------------------------------
# Bessel functions of the first kind, integer order
# --------------------------------------------------------------------------

def _series_orders(n_max, x):
    # power series, used for |x| < 1 where it converges in a handful of terms
    half = 0.5 * x
    out = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        log_lead = n * math.log(half) - math.lgamma(n + 1)
        if log_lead < -745.0:
            break
        term = math.exp(log_lead)
        total = term
        k = 0
        while abs(term) > 1e-17 * abs(total):
            k += 1
            term *= -half * half / (k * (n + k))
            total += term
        out[n] = total
    return out


def _miller_orders(n_max, x):
    top = max(n_max, int(math.ceil(x)))
    start = top + 30 + int(math.sqrt(60.0 * top))
    start += start % 2
    vals = np.zeros(start + 2)
    vals[start] = 1.0
    for j in range(start, 0, -1):
        vals[j - 1] = (2.0 * j / x) * vals[j] - vals[j + 1]
        if abs(vals[j - 1]) > 1e250:
            vals[j - 1:] *= 1e-250
    norm = vals[0] + 2.0 * vals[2:start + 1:2].sum()
    return vals[: n_max + 1] / norm


@functools.lru_cache(maxsize=4096)
def _orders_cached(n_max, x):
    if 0.5 * x == 0.0:  # also catches subnormal x
        out = np.zeros(n_max + 1)
        out[0] = 1.0
    elif x < 1.0:
        out = _series_orders(n_max, x)
    else:
        out = _miller_orders(n_max, x)
    out.setflags(write=False)
    return out


def bessel_orders(n_max: int, x: float) -> np.ndarray:
    """J_0(x) .. J_{n_max}(x) in one backward sweep.

    Miller's algorithm: recur downwards from an order well above both
    ``n_max`` and ``x`` and normalise with J_0 + 2 sum_k J_2k = 1.  Small
    arguments use the power series instead.
    """
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    x = float(x)
    out = np.array(_orders_cached(int(n_max), abs(x)))
    if x < 0:
        out[1::2] *= -1.0
    return out


def bessel_signed_orders(n_max: int, x: float) -> np.ndarray:
    """J_n(x) for n = -n_max .. n_max (index n + n_max)."""
    pos = bessel_orders(n_max, x)
    neg = pos[:0:-1] * np.where(np.arange(n_max, 0, -1) % 2, -1.0, 1.0)
    return np.concatenate([neg, pos])


def bessel_j(n: int, x: float) -> float:
    """J_n(x) for integer n, |n| <= 200 and |x| <= 100."""
    n = int(n)
    if abs(n) > MAX_ORDER or not abs(x) <= MAX_ARG:
        raise OutOfEnvelope(f"J_{n}({x!r}) is outside |n| <= {MAX_ORDER}, |x| <= {MAX_ARG}")
    value = float(bessel_orders(abs(n), x)[abs(n)])
    return -value if (n < 0 and n % 2) else value


def _bisect_root(fn, lo, hi, tol):
    flo = fn(lo)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fmid = fn(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bessel_zeros(n: int, x_max: float, step: float = 0.05, tol: float = 1e-13) -> list[float]:
    """Positive zeros of J_n in (0, x_max], bracketed on a grid and bisected."""
    if not 0 < x_max <= MAX_ARG:
        raise OutOfEnvelope(f"x_max must lie in (0, {MAX_ARG}]")
    order = abs(int(n))
    if order > MAX_ORDER:
        raise OutOfEnvelope(f"order {n} exceeds {MAX_ORDER}")
    fn = lambda x: bessel_j(order, x)
    count = max(2, int(math.ceil(x_max / step)) + 1)
    grid = np.linspace(0.0, x_max, count)[1:]
    zeros = []
    prev_x, prev_v = float(grid[0]), fn(float(grid[0]))
    if prev_v == 0.0:
        zeros.append(prev_x)
    for x in grid[1:]:
        x = float(x)
        v = fn(x)
        if v == 0.0:
            zeros.append(x)
        elif prev_v != 0.0 and (v < 0) != (prev_v < 0):
            zeros.append(_bisect_root(fn, prev_x, x, tol))
        prev_x, prev_v = x, v
    return zeros


# --------------------------------------------------------------------------
# Drive, gamma ansatz and first-order phase correction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DriveParameters:
    """Well modulation V1 cos(omega t); ``omega`` is hbar*omega in energy units."""

    v1: float
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not self.v1 >= 0:
            raise ValueError("v1 must be non-negative")

    @property
    def f(self) -> float:
        return self.v1 / self.omega

    def first_order_valid(self, system: BarrierSystem) -> bool:
        return self.omega <= OMEGA_WARN_FRACTION * system.v0


def _sin_phi(state):
    sin_phi = math.sin(eltschka(state).phi)
    if sin_phi < 1e-12:
        raise SingularPhase(f"sin(phi) = {sin_phi:.3e}")
    return sin_phi


def gamma_parameter(state: KinematicState, dk_de: float | None = None,
                    dq_de: float | None = None) -> float:
    """Scale factor making A_n = J_n(gamma f) a fixed point of sideband mixing.

    The energy derivatives default to the analytic ones carried by ``state``;
    pass finite-difference estimates to cross-check.
    """
    dk = state.dk_de if dk_de is None else dk_de
    dq = state.dq_de if dq_de is None else dq_de
    sin_phi = _sin_phi(state)
    return -(state.l_phase + sin_phi) / ((dq / state.q) * (state.k / dk) * sin_phi)


def _phase_coefficients(state, system):
    # (L - phi)_1 = omega * (c_n n + c_l l + c_m m)
    sin_phi = _sin_phi(state)
    dk, dq, k, q = state.dk_de, state.dq_de, state.k, state.q
    c_l = -(dk * system.d + sin_phi * dk / k)
    c_m = sin_phi * dq / q
    c_n = dk * (system.d + sin_phi / k)
    return c_n, c_l, c_m


def phase_correction(state: KinematicState, system: BarrierSystem, omega: float,
                     n: int, l: int, m: int) -> float:
    """First-order shift of L - phi for the path entering at sideband n,
    crossing the well at l and leaving at m."""
    c_n, c_l, c_m = _phase_coefficients(state, system)
    return omega * (c_n * n + c_l * l + c_m * m)


# --------------------------------------------------------------------------
# Sideband sums
# --------------------------------------------------------------------------

def truncation_order(argument: float) -> int:
    return int(math.ceil(abs(argument))) + 20


def neumann_sum_check(u: float, gamma: float, m: int, n_trunc: int) -> tuple[float, float]:
    """Truncated double sums sum_{n,l} J_{n-l}(u) J_{m-l}(u) J_n(gamma u) (times l for s1).

    Expected: s0 = J_m(gamma u) and s1 = m (1 - 1/gamma) J_m(gamma u).
    """
    if n_trunc < truncation_order(gamma * u):
        raise ValueError(f"n_trunc must be at least ceil(gamma*u) + 20 = {truncation_order(gamma * u)}")
    if abs(m) > n_trunc:
        raise ValueError("|m| must not exceed n_trunc")
    idx = np.arange(-n_trunc, n_trunc + 1)
    j_u = bessel_signed_orders(2 * n_trunc, u)  # index (order + 2 n_trunc)
    j_gu = bessel_signed_orders(n_trunc, gamma * u)
    jnl = j_u[idx[:, None] - idx[None, :] + 2 * n_trunc]  # [n, l]
    jml = j_u[m - idx + 2 * n_trunc]  # [l]
    weights = jnl * jml[None, :] * j_gu[:, None]
    return float(weights.sum()), float((weights * idx[None, :]).sum())


PROPAGATOR_VARIANTS = ("linear", "printed", "exponential")


def _bracket(variant, phase):
    if variant == "linear":
        return 1.0 - 1j * phase
    if variant == "printed":
        return 1.0 - phase
    if variant == "exponential":
        return np.exp(-1j * phase)
    raise ValueError(f"unknown propagator variant {variant!r}; choose from {PROPAGATOR_VARIANTS}")


def sideband_mix(state: KinematicState, system: BarrierSystem, drive: DriveParameters,
                 incident: dict[int, float], n_trunc: int | None = None,
                 variant: str = "linear") -> dict[int, complex]:
    """Outgoing sideband amplitudes B_m for incident amplitudes A_n.

    B_m = sum_{n,l} J_{n-l}(f) J_{m-l}(f) D(n,l,m) A_n with the resonant
    propagator D taken, up to the overall phase i, as

    * ``linear``: 1 - i (L-phi)_1 (first-order expansion of exp(-i (L-phi)_1)),
    * ``printed``: 1 - (L-phi)_1,
    * ``exponential``: exp(-i (L-phi)_1), which keeps the second-order terms.

    Outgoing orders run over |m| <= n_trunc; the intermediate order l is
    summed over |l| <= n_trunc + ceil(f) + 20 so that J_{n-l}(f) is resolved.
    """
    if not is_resonant(state, eltschka(state)):
        raise NotAtResonance("sideband mixing is only defined at resonance")
    if not drive.first_order_valid(system):
        warnings.warn(f"hbar*omega = {drive.omega} exceeds {OMEGA_WARN_FRACTION} V0; "
                      "first-order expansion is strained", RuntimeWarning, stacklevel=2)
    if n_trunc is None:
        n_trunc = max(abs(n) for n in incident) if incident else 0
    f = drive.f
    l_max = n_trunc + truncation_order(f)
    n_idx = np.arange(-n_trunc, n_trunc + 1)
    l_idx = np.arange(-l_max, l_max + 1)
    span = n_trunc + l_max
    j_f = bessel_signed_orders(span, f)
    jnl = j_f[n_idx[:, None] - l_idx[None, :] + span]  # [n or m, l]
    amp = np.array([incident.get(int(n), 0.0) for n in n_idx], dtype=float)

    c_n, c_l, c_m = _phase_coefficients(state, system)
    w = drive.omega
    out = {}
    for mi, m in enumerate(n_idx):
        phase = w * (c_n * n_idx[:, None] + c_l * l_idx[None, :] + c_m * m)
        kernel = jnl * jnl[mi][None, :] * _bracket(variant, phase)
        out[int(m)] = complex(amp @ kernel.sum(axis=1))
    return out


def ansatz_residual(state: KinematicState, system: BarrierSystem, drive: DriveParameters,
                    gamma: float | None = None, variant: str = "linear",
                    n_trunc: int | None = None) -> float:
    """max_m |B_m - A_m| for the trial distribution A_n = J_n(gamma f)."""
    if gamma is None:
        gamma = gamma_parameter(state)
    if n_trunc is None:
        n_trunc = truncation_order(gamma * drive.f)
    values = bessel_signed_orders(n_trunc, gamma * drive.f)
    incident = {n: float(values[n + n_trunc]) for n in range(-n_trunc, n_trunc + 1)}
    mixed = sideband_mix(state, system, drive, incident, n_trunc, variant)
    return max(abs(mixed[m] - incident[m]) for m in incident)


@dataclass(frozen=True)
class SidebandSpectrum:
    gamma: float
    f: float
    n_max: int
    amplitudes: dict
    probabilities: dict

    @property
    def total_probability(self) -> float:
        return math.fsum(self.probabilities.values())


def sideband_spectrum(state: KinematicState, drive: DriveParameters,
                      n_max: int | None = None) -> SidebandSpectrum:
    if not is_resonant(state, eltschka(state)):
        raise NotAtResonance("sideband spectrum requires a resonant energy")
    gamma = gamma_parameter(state)
    arg = gamma * drive.f
    if n_max is None:
        n_max = truncation_order(arg)
    if abs(arg) > MAX_ARG or n_max > MAX_ORDER:
        raise OutOfEnvelope(f"gamma*f = {arg:.6g} with n_max = {n_max} is outside the Bessel envelope")
    values = bessel_signed_orders(n_max, arg)
    amplitudes = {n: float(values[n + n_max]) for n in range(-n_max, n_max + 1)}
    probabilities = {n: a * a for n, a in amplitudes.items()}
    return SidebandSpectrum(gamma, drive.f, n_max, amplitudes, probabilities)


def quench_points(state: KinematicState, n: int, f_max: float) -> list[float]:
    """Drive strengths f in (0, f_max] at which sideband n is switched off."""
    if not f_max > 0:
        raise ValueError("f_max must be positive")
    gamma = gamma_parameter(state)
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return [x / gamma for x in bessel_zeros(n, gamma * f_max)]

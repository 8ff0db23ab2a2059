"""Named self-checks run by ``dbtunnel verify``.

Every check returns a :class:`CheckResult`.  Status ``NOTE`` marks a
documented discrepancy that is reported but does not fail the run.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import floquet
from .core import BarrierSystem, finite_difference_derivatives, kinematics
from .oracle import PiecewisePotential, from_double_barrier, scattering_amplitudes
from .pathsum import (
    composed_amplitude,
    find_resonances,
    region_amplitudes,
    resonance_terms,
    single_barrier_amplitude,
    transmission_at_resonance,
    transmission_off_resonance,
    well_detuning,
)
from .prescriptions import (
    Transition,
    aoyama_harano,
    consistency_residual,
    conventional_wkb,
    eltschka,
    turning_point_factor,
)

DEFAULT_SEED = 20240917
THETAS = (2.0, 3.0, 4.0, 5.0)


@dataclass
class CheckResult:
    name: str
    status: str  # PASS, FAIL or NOTE
    measured: float
    tolerance: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status != "FAIL"


def _status(passed):
    return "PASS" if passed else "FAIL"


def check_consistency_eltschka(system, rng):
    energies = np.linspace(0.02, 0.98, 50) * system.v0
    worst = max(abs(consistency_residual(eltschka(kinematics(system, float(e))))) for e in energies)
    return CheckResult("consistency_eltschka", _status(worst <= 1e-14), worst, 1e-14)


def check_consistency_wkb(system, rng):
    value = abs(consistency_residual(conventional_wkb()))
    return CheckResult("consistency_wkb", _status(value <= 1e-14), value, 1e-14)


def check_consistency_aoyama_harano(system, rng):
    value = consistency_residual(aoyama_harano())
    expected = 1.0 - math.sqrt(0.5)
    status = "NOTE" if abs(value - expected) <= 1e-7 else "FAIL"
    return CheckResult("consistency_aoyama_harano", status, value, 1e-7,
                       "N*N_bar - sin((phi-phi_bar)/2) is nonzero for this prescription")


def off_resonance_samples(rng, count, min_sin=0.1):
    """(v0, e, d) triples whose Eltschka detuning has |sin(L - phi)| > min_sin."""
    out = []
    while len(out) < count:
        v0 = float(rng.uniform(1.0, 50.0))
        e = float(rng.uniform(0.05, 0.95)) * v0
        d = float(rng.uniform(0.5, 5.0))
        state = kinematics(BarrierSystem(v0, 1.0, d), e)
        if abs(math.sin(well_detuning(state, eltschka(state)))) > min_sin:
            out.append((v0, e, d))
    return out


def _random_states(rng, count):
    out = []
    while len(out) < count:
        v0 = float(rng.uniform(0.5, 50.0))
        e = float(rng.uniform(0.05, 0.95)) * v0
        w = float(rng.uniform(0.1, 3.0))
        d = float(rng.uniform(0.1, 5.0))
        system = BarrierSystem(v0, w, d)
        state = kinematics(system, e)
        if abs(math.sin(well_detuning(state, eltschka(state)))) * math.sinh(2 * state.theta) > 1.0:
            out.append(state)
    return out


def check_eq6_eq8_ratios(system, rng):
    worst6 = worst8 = 0.0
    for state in _random_states(rng, 200):
        p = eltschka(state)
        ra = region_amplitudes(state, p)
        alpha = well_detuning(state, p)
        want6 = -(p.n_amp / (2 * p.n_bar_amp)) * complex(math.cos(p.phi), -math.sin(p.phi)) * math.exp(-state.theta)
        worst6 = max(worst6, abs(ra.t12_minus / ra.t12 - want6) / abs(want6))
        worst8 = max(worst8, abs(ra.t23 / ra.t21 - complex(math.cos(alpha), -math.sin(alpha))))
    return [
        CheckResult("eq6_ratio", _status(worst6 <= 1e-14), worst6, 1e-14),
        CheckResult("eq8_ratio", _status(worst8 <= 1e-14), worst8, 1e-14),
    ]


def check_single_barrier(system, rng):
    worst = 0.0
    for _ in range(100):
        v0 = float(rng.uniform(0.5, 50.0))
        e = float(rng.uniform(0.05, 0.95)) * v0
        q = math.sqrt(v0 - e)
        w = float(rng.uniform(0.5, 10.0)) / q
        state = kinematics(BarrierSystem(v0, w, 1.0), e)
        semi = abs(single_barrier_amplitude(state, eltschka(state))) ** 2
        exact = abs(scattering_amplitudes(PiecewisePotential(((w, v0),)), e).t) ** 2
        worst = max(worst, abs(semi - exact) / exact)
    return CheckResult("single_barrier_exact", _status(worst <= 1e-12), worst, 1e-12)


def check_eq16_vs_composed(system, rng):
    """Composed route vs closed form: C(theta) = max|diff| e^{4 theta} must not grow.

    The printed closed form carries a constant factor -1 relative to the
    composed route; amplitudes are compared after removing it.
    """
    samples = off_resonance_samples(rng, 100)
    consts, ratios = [], []
    for theta in THETAS:
        worst = 0.0
        for v0, e, d in samples:
            state = kinematics(BarrierSystem(v0, theta / math.sqrt(v0 - e), d), e)
            p = eltschka(state)
            closed = transmission_off_resonance(state, p).amplitude
            composed = composed_amplitude(state, p)
            ratios.append(composed / closed)
            worst = max(worst, abs(composed + closed))
        consts.append(worst * math.exp(4 * theta))
    growth = max(b / a for a, b in zip(consts, consts[1:]))
    mean_ratio = complex(np.mean(ratios))
    return CheckResult(
        "eq16_vs_composed", _status(growth <= 1.0 + 1e-9), growth, 1.0,
        f"C(theta)={['%.3g' % c for c in consts]}; mean composed/closed = {mean_ratio:.4f}",
        {"constants": consts},
    )


def check_eq16_vs_oracle(system, rng):
    samples = off_resonance_samples(rng, 100)
    worst = []
    for theta in THETAS:
        errs = []
        for v0, e, d in samples:
            sys_ = BarrierSystem(v0, theta / math.sqrt(v0 - e), d)
            state = kinematics(sys_, e)
            semi = transmission_off_resonance(state, eltschka(state)).probability
            exact = abs(scattering_amplitudes(from_double_barrier(sys_), e).t) ** 2
            errs.append(abs(semi - exact) / exact)
        worst.append(max(errs))
    slope = -np.polyfit(THETAS, np.log(worst), 1)[0]
    return CheckResult("eq16_vs_oracle_order", "NOTE", slope, 4.0,
                       f"relative error decays like exp(-{slope:.2f} theta); "
                       f"max errors {['%.3g' % x for x in worst]}")


def check_resonance_unimodular(system, rng):
    roots = find_resonances(system, "eltschka", 0.01 * system.v0, 0.99 * system.v0)
    worst_p = worst_a = 0.0
    for e in roots:
        state = kinematics(system, e)
        res = transmission_at_resonance(state)
        alpha = well_detuning(state, eltschka(state))
        target = 1j * complex(math.cos(alpha), -math.sin(alpha))
        worst_p = max(worst_p, abs(res.probability - 1.0))
        worst_a = max(worst_a, abs(resonance_terms(state).amplitude - target) / (5 * math.exp(-4 * state.theta)))
    return [
        CheckResult("resonance_unimodular", _status(worst_p <= 1e-12), worst_p, 1e-12, f"{len(roots)} roots"),
        CheckResult("resonance_assembly", _status(worst_a <= 1.0), worst_a, 1.0,
                    "max |assembled - i exp(-i(L-phi))| / (5 exp(-4 theta))"),
    ]


def random_potential(rng, max_segments=5):
    n = int(rng.integers(0, max_segments + 1))
    segs = tuple((float(rng.uniform(0.05, 2.0)), float(rng.uniform(-5.0, 20.0))) for _ in range(n))
    return PiecewisePotential(segs), float(rng.uniform(0.05, 15.0))


def check_oracle(system, rng):
    worst_u = worst_r = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for _ in range(500):
            pot, e = random_potential(rng)
            fwd = scattering_amplitudes(pot, e)
            back = scattering_amplitudes(pot.reversed(), e)
            worst_u = max(worst_u, abs(fwd.flux_defect))
            tf, tb = abs(fwd.t) ** 2, abs(back.t) ** 2
            worst_r = max(worst_r, abs(tf - tb) / max(tf, 1e-300))
    return [
        CheckResult("oracle_unitarity", _status(worst_u <= 1e-10), worst_u, 1e-10),
        CheckResult("oracle_reciprocity", _status(worst_r <= 1e-12), worst_r, 1e-12),
    ]


def check_bessel(system, rng):
    worst = 0.0
    for u in (0.5, 1.0, 2.0, 5.0, 10.0):
        values = floquet.bessel_signed_orders(int(math.ceil(u)) + 40, u)
        worst = max(worst, abs(math.fsum(values * values) - 1.0))
    zero = floquet.bessel_zeros(0, 3.0)[0]
    return [
        CheckResult("bessel_normalization", _status(worst <= 1e-12), worst, 1e-12),
        CheckResult("bessel_j0_zero", _status(abs(zero - 2.4048256) <= 1e-7), zero, 1e-7),
    ]


def check_neumann(system, rng):
    worst = 0.0
    for u in (0.25, 0.5, 1.0):
        for gamma in (1.5, 2.0, 2.5707963):
            for m in range(4):
                s0, s1 = floquet.neumann_sum_check(u, gamma, m, floquet.truncation_order(gamma * u))
                jm = floquet.bessel_j(m, gamma * u)
                worst = max(worst, abs(s0 - jm), abs(s1 - m * (1 - 1 / gamma) * jm))
    return CheckResult("neumann_identities", _status(worst <= 1e-8), worst, 1e-8)


def check_gamma(system, rng):
    resonant = BarrierSystem(2.0, 2.0, math.pi / 2)
    state = kinematics(resonant, 1.0)
    gamma = floquet.gamma_parameter(state)
    h = 1e-5 * state.e
    dk, dq = finite_difference_derivatives(resonant, state.e, h)
    gamma_fd = floquet.gamma_parameter(state, dk, dq)
    fd_err = abs(gamma_fd - gamma) / gamma

    f = 0.5
    res = {}
    for label, g in (("ansatz", gamma), ("control", 0.5 * gamma)):
        for variant in ("linear", "exponential"):
            res[label, variant] = [
                floquet.ansatz_residual(state, resonant, floquet.DriveParameters(f * w, w), g, variant)
                for w in (0.02, 0.01)
            ]
    linear = max(res["ansatz", "linear"])
    shrink = res["ansatz", "exponential"][0] / res["ansatz", "exponential"][1]
    control = res["control", "exponential"][0] / res["control", "exponential"][1]
    ok = linear <= 1e-12 and shrink >= 3.5 and control < 2.5
    return [
        CheckResult("gamma_fd_derivatives", _status(fd_err <= 1e-6), fd_err, 1e-6),
        CheckResult("gamma_self_consistency", _status(ok), shrink, 3.5,
                    f"linear residual {linear:.2e}; halving omega shrinks residual {shrink:.3f}x "
                    f"(control {control:.3f}x)"),
    ]


ALL_CHECKS = (
    check_consistency_eltschka,
    check_consistency_wkb,
    check_consistency_aoyama_harano,
    check_eq6_eq8_ratios,
    check_single_barrier,
    check_eq16_vs_composed,
    check_eq16_vs_oracle,
    check_resonance_unimodular,
    check_oracle,
    check_bessel,
    check_neumann,
    check_gamma,
)


def run_checks(system: BarrierSystem, seed: int = DEFAULT_SEED) -> list[CheckResult]:
    results = []
    for fn in ALL_CHECKS:
        rng = np.random.default_rng(seed)
        out = fn(system, rng)
        results.extend(out if isinstance(out, list) else [out])
    return results

import math
import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from dbtunnel.core import BarrierSystem
from dbtunnel.errors import EnergyOutOfRange, NumericalOverflow
from dbtunnel.oracle import (
    PiecewisePotential,
    exact_peak_positions,
    exact_transmission,
    from_double_barrier,
    scattering_amplitudes,
)
from dbtunnel.pathsum import Method

segment = st.tuples(st.floats(0.05, 3.0), st.floats(-5.0, 20.0))


def textbook_single_barrier(v0, w, e):
    k, q = math.sqrt(e), math.sqrt(v0 - e)
    return 1.0 / (1.0 + ((k * k + q * q) / (2 * k * q)) ** 2 * math.sinh(q * w) ** 2)


def test_from_double_barrier_layout():
    assert from_double_barrier(BarrierSystem(2, 1, 3)).segments == ((1, 2), (3, 0), (1, 2))
    assert from_double_barrier(BarrierSystem(1, 0.5, 0.5)).segments == ((0.5, 1), (0.5, 0), (0.5, 1))
    pot = from_double_barrier(BarrierSystem(4.0, 0.7, 2.2))
    assert pot.total_length == pytest.approx(2 * 0.7 + 2.2)


def test_segment_lengths_must_be_positive():
    with pytest.raises(ValueError):
        PiecewisePotential(((0.0, 1.0),))


@pytest.mark.parametrize("e", [0.01, 1.0, 37.0])
def test_free_propagation(e):
    result = exact_transmission(PiecewisePotential(), e)
    assert result.probability == pytest.approx(1.0, abs=1e-15)
    assert result.method is Method.EXACT


def test_single_segment_closed_form():
    v0, w = 3.0, 1.3
    for e in np.linspace(0.03, 2.97, 100):
        got = exact_transmission(PiecewisePotential(((w, v0),)), float(e)).probability
        assert got == pytest.approx(textbook_single_barrier(v0, w, float(e)), rel=1e-12)


def test_double_barrier_reaches_unity_at_peak():
    pot = from_double_barrier(BarrierSystem(2.0, 2.0, math.pi / 2))
    peaks = exact_peak_positions(pot, 0.5, 1.5)
    assert len(peaks) == 1
    assert exact_transmission(pot, peaks[0]).probability == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=300)
@given(segs=st.lists(segment, max_size=5), e=st.floats(0.01, 25.0))
def test_unitarity_and_reciprocity(segs, e):
    # at a segment height the exponential basis degenerates; covered separately
    assume(all(abs(e - h) > 1e-6 * max(e, abs(h)) for _, h in segs))
    pot = PiecewisePotential(tuple(segs))
    amps = scattering_amplitudes(pot, e)
    back = scattering_amplitudes(pot.reversed(), e)
    assert abs(amps.flux_defect) <= 1e-10
    assert abs(back.t) ** 2 == pytest.approx(abs(amps.t) ** 2, rel=1e-12, abs=1e-300)


def test_threshold_energy_is_shifted_with_warning():
    pot = PiecewisePotential(((1.0, 2.0),))
    with pytest.warns(RuntimeWarning, match="shifted"):
        result = exact_transmission(pot, 2.0)
    assert 0 < result.probability < 1
    with pytest.warns(RuntimeWarning):
        amps = scattering_amplitudes(PiecewisePotential(((1.0, 0.0), (1.0, 1.0))), 1.0)
    assert abs(amps.flux_defect) <= 1e-10


def test_thick_barrier_stability():
    v0, e = 2.0, 1.0
    pot = from_double_barrier(BarrierSystem(v0, 25.0, 1.3))
    amps = scattering_amplitudes(pot, e)
    assert abs(amps.flux_defect) <= 1e-8
    assert 0 <= abs(amps.t) ** 2 < 1e-40


def test_overflow_is_reported():
    pot = PiecewisePotential(((800.0, 2.0),))
    with pytest.raises(NumericalOverflow):
        exact_transmission(pot, 1.0)


@pytest.mark.parametrize("e", [0.0, -1.0, float("nan")])
def test_energy_must_be_positive(e):
    with pytest.raises(EnergyOutOfRange):
        exact_transmission(PiecewisePotential(), e)


def test_peaks_are_local_maxima():
    pot = from_double_barrier(BarrierSystem(50.0, 1.0, 1.0))
    peaks = exact_peak_positions(pot, 5.0, 45.0)
    assert len(peaks) == 2
    for e in peaks:
        t = exact_transmission(pot, e).probability
        for de in (1e-6, -1e-6):
            assert exact_transmission(pot, e + de).probability <= t


def test_monotone_segment_has_no_peak():
    assert exact_peak_positions(PiecewisePotential(((1.0, 5.0),)), 0.5, 4.5) == []

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dbtunnel.core import BarrierSystem, finite_difference_derivatives, kinematics
from dbtunnel.errors import EnergyOutOfRange


def test_kinematics_unit_case():
    s = kinematics(BarrierSystem(2.0, 1.0, 1.0), 1.0)
    assert (s.k, s.q, s.theta, s.l_phase) == (1.0, 1.0, 1.0, 1.0)
    assert s.dk_de == 0.5 and s.dq_de == -0.5


def test_kinematics_quarter_energy():
    s = kinematics(BarrierSystem(1.0, 2.0, 3.0), 0.25)
    assert s.k == pytest.approx(0.5, abs=1e-15)
    assert s.q == pytest.approx(0.8660254, abs=1e-7)
    assert s.theta == pytest.approx(1.7320508, abs=1e-7)
    assert s.l_phase == pytest.approx(1.5, abs=1e-15)


@pytest.mark.parametrize("e", [1.5, 1.0, 0.0, -0.3, 1e-14, float("nan")])
def test_energy_out_of_range(e):
    with pytest.raises(EnergyOutOfRange):
        kinematics(BarrierSystem(1.0, 1.0, 1.0), e)


@pytest.mark.parametrize("field", ["v0", "w", "d"])
def test_system_rejects_nonpositive(field):
    kwargs = dict(v0=1.0, w=1.0, d=1.0)
    kwargs[field] = 0.0
    with pytest.raises(ValueError, match=field):
        BarrierSystem(**kwargs)


def test_finite_differences_at_unit_energy():
    dk, dq = finite_difference_derivatives(BarrierSystem(2.0, 1.0, 1.0), 1.0, 1e-5)
    assert dk == pytest.approx(0.5, abs=1e-8)
    assert dq == pytest.approx(-0.5, abs=1e-8)


def test_finite_differences_half_energy():
    dk, _ = finite_difference_derivatives(BarrierSystem(1.0, 1.0, 1.0), 0.5, 1e-5)
    assert dk == pytest.approx(1 / (2 * math.sqrt(0.5)), abs=1e-7)
    assert dk == pytest.approx(0.7071068, abs=1e-7)


def test_finite_difference_stencil_outside_window():
    with pytest.raises(EnergyOutOfRange):
        finite_difference_derivatives(BarrierSystem(1.0, 1.0, 1.0), 0.99, 0.05)


def test_analytic_derivatives_match_stencil_on_grid():
    system = BarrierSystem(3.0, 1.0, 1.0)
    for e in np.linspace(0.05, 0.95, 100) * system.v0:
        s = kinematics(system, float(e))
        dk, dq = finite_difference_derivatives(system, float(e), 1e-5 * e)
        assert dk == pytest.approx(s.dk_de, rel=1e-6)
        assert dq == pytest.approx(s.dq_de, rel=1e-6)


@given(v0=st.floats(0.01, 1e3), frac=st.floats(0.001, 0.999),
       w=st.floats(0.01, 10), d=st.floats(0.01, 10))
def test_momentum_identity_and_purity(v0, frac, w, d):
    system = BarrierSystem(v0, w, d)
    s = kinematics(system, frac * v0)
    assert s.k * s.k + s.q * s.q == pytest.approx(v0, rel=1e-14)
    assert s.k > 0 and s.q > 0 and s.dk_de > 0 > s.dq_de
    assert kinematics(system, frac * v0) == s

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psc_tsa import (
    AngleState,
    DomainError,
    NetworkState,
    PscParams,
    SgParams,
    StateLabel,
    ab_coefficients,
    electrical_power,
    grid_current,
    psc_rhs,
    sg_energy,
    sg_rhs,
)

POST = NetworkState(StateLabel.POST_FAULT, 0.95)
DURING = NetworkState(StateLabel.DURING_FAULT, 1.128421052631579)
P = PscParams(k=9.3, p_ref=1.0)


def test_electrical_power_examples():
    assert electrical_power(math.pi / 2, 1.0, 1.0, 0.95) == pytest.approx(1 / 0.95)
    assert electrical_power(0.0, 1.0, 1.0, 0.95) == 0.0
    assert electrical_power(math.pi / 6, 1.2, 0.9, 0.5) == pytest.approx(1.2 * 0.9 * 0.5 / 0.5)


def test_rhs_at_post_fault_sep_vanishes():
    sep = math.asin(0.95)
    assert abs(psc_rhs(sep, P, POST)) < 1e-12
    assert abs(psc_rhs(math.pi - sep, P, POST)) < 1e-12


def test_ab_coefficients_during_fault():
    a, b = ab_coefficients(P, DURING)
    assert a == pytest.approx(9.3)
    assert b == pytest.approx(8.2416, abs=1e-4)
    assert a > b


def test_rhs_sign_pattern_around_equilibria():
    sep, uep = math.asin(0.95), math.pi - math.asin(0.95)
    assert psc_rhs(sep - 0.1, P, POST) > 0
    assert psc_rhs(sep + 0.1, P, POST) < 0
    assert psc_rhs(uep + 0.1, P, POST) > 0


def test_rhs_without_equilibria_is_positive_everywhere():
    d = np.linspace(-4 * math.pi, 4 * math.pi, 20001)
    assert np.all(psc_rhs(d, P, DURING) > 0)


@settings(max_examples=200, deadline=None)
@given(
    delta=st.floats(min_value=-20.0, max_value=20.0),
    k=st.floats(min_value=0.1, max_value=50.0),
    p_ref=st.floats(min_value=-2.0, max_value=2.0),
    x=st.floats(min_value=0.05, max_value=5.0),
)
def test_rhs_is_2pi_periodic(delta, k, p_ref, x):
    p = PscParams(k=k, p_ref=p_ref)
    net = NetworkState(StateLabel.PRE_FAULT, x)
    assert psc_rhs(delta + 2 * math.pi, p, net) == pytest.approx(psc_rhs(delta, p, net), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(p_ref=st.floats(min_value=0.0, max_value=3.0), x=st.floats(min_value=0.1, max_value=2.0))
def test_zero_count_per_period(p_ref, x):
    # two simple zeros per period when p_ref < p_max, none when above
    p = PscParams(k=1.0, p_ref=p_ref)
    net = NetworkState(StateLabel.PRE_FAULT, x)
    ratio = p_ref * x
    if abs(ratio - 1.0) < 1e-3:
        return
    d = np.linspace(0.0, 2 * math.pi, 4001, endpoint=False) + 1e-4
    f = psc_rhs(d, p, net)
    changes = np.count_nonzero(np.sign(f) != np.sign(np.roll(f, 1)))
    assert changes == (2 if ratio < 1.0 else 0)


def test_grid_current_examples():
    assert grid_current(0.0, 1.0, 1.0, 0.95) == 0.0
    assert grid_current(math.pi, 1.0, 1.0, 0.95) == pytest.approx(2 / 0.95)
    # law of cosines on the phasor difference
    d, v1, v2, x = 0.7, 1.1, 0.9, 0.6
    ref = abs(v1 * complex(math.cos(d), math.sin(d)) - v2) / x
    assert grid_current(d, v1, v2, x) == pytest.approx(ref, rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(delta=st.floats(min_value=-10, max_value=10), x=st.floats(min_value=0.05, max_value=5))
def test_grid_current_matches_phasor(delta, x):
    ref = abs(complex(math.cos(delta), math.sin(delta)) - 1.0) / x
    assert grid_current(delta, 1.0, 1.0, x) == pytest.approx(ref, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("fn", [electrical_power, grid_current])
def test_non_positive_reactance_is_rejected(fn):
    with pytest.raises(DomainError):
        fn(0.3, 1.0, 1.0, 0.0)


def test_psc_params_validation():
    with pytest.raises(DomainError):
        PscParams(k=0.0, p_ref=1.0)
    with pytest.raises(DomainError):
        PscParams(k=1.0, p_ref=1.0, i_limit=-1.0)


def test_sg_rhs_and_params():
    p = SgParams(p_m=1.0, j_eff=0.0318, d=0.1)
    d1, d2 = sg_rhs(AngleState(0.5, 0.2), p, POST)
    assert d1 == 0.2
    assert d2 == pytest.approx((1.0 - math.sin(0.5) / 0.95 - 0.1 * 0.2) / 0.0318)
    with pytest.raises(DomainError):
        SgParams(p_m=1.0, j_eff=0.0)
    with pytest.raises(DomainError):
        SgParams(p_m=1.0, j_eff=1.0, d=-0.1)


def test_sg_energy_gradient_matches_rhs():
    # d/dt E = (dE/ddelta) * w + (dE/dw) * w_dot = 0 for the undamped machine
    p = SgParams(p_m=0.8, j_eff=0.05)
    s = AngleState(0.9, 1.3)
    h = 1e-6
    de_dd = (sg_energy(s.delta + h, s.delta_dot, p, POST) - sg_energy(s.delta - h, s.delta_dot, p, POST)) / (2 * h)
    de_dw = (sg_energy(s.delta, s.delta_dot + h, p, POST) - sg_energy(s.delta, s.delta_dot - h, p, POST)) / (2 * h)
    d1, d2 = sg_rhs(s, p, POST)
    assert de_dd * d1 + de_dw * d2 == pytest.approx(0.0, abs=1e-7)

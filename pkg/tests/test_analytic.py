import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psc_tsa import (
    ClosedFormCoeffs,
    DomainError,
    EquilibriumKind,
    NetworkState,
    NoEquilibriumError,
    PscParams,
    StateLabel,
    ValidityDomainError,
    cca,
    cct,
    closed_form_time,
    find_equilibria,
    sample_portrait,
    slip_period,
)

from oracles import ode_time_to_angles, quadrature_time

P = PscParams(k=9.3, p_ref=1.0)
PRE = NetworkState(StateLabel.PRE_FAULT, 0.8 + 0.15 * 0.8 / 0.95)
DURING = NetworkState(StateLabel.DURING_FAULT, 1.128421052631579)
POST = NetworkState(StateLabel.POST_FAULT, 0.95)

ab_pairs = st.tuples(
    st.floats(min_value=0.5, max_value=30.0), st.floats(min_value=0.0, max_value=0.98)
).map(lambda t: (t[0], t[0] * t[1]))


def test_equilibria_examples():
    eq = find_equilibria(P, POST)
    assert eq.sep == pytest.approx(math.asin(0.95))
    assert math.degrees(eq.sep) == pytest.approx(71.805, abs=1e-3)
    assert eq.uep == pytest.approx(math.pi - math.asin(0.95))
    assert eq.p_max == pytest.approx(1 / 0.95)
    assert not find_equilibria(P, DURING).exist


def test_equilibria_at_boundary_coincide():
    eq = find_equilibria(PscParams(k=1.0, p_ref=1.0), NetworkState(StateLabel.POST_FAULT, 1.0))
    assert eq.sep == pytest.approx(math.pi / 2)
    assert eq.uep == pytest.approx(math.pi / 2)


def test_portrait_locates_and_classifies_zeros():
    por = sample_portrait(P, POST, -math.pi, math.pi, 721)
    assert len(por.delta) == 721
    kinds = [(round(math.degrees(d), 6), k) for d, k in por.equilibria]
    assert len(kinds) == 2
    (d1, k1), (d2, k2) = kinds
    assert k1 is EquilibriumKind.SEP and k2 is EquilibriumKind.UEP
    assert d1 == pytest.approx(71.805, abs=1e-3)
    assert d2 == pytest.approx(108.195, abs=1e-3)
    assert sample_portrait(P, DURING, -math.pi, math.pi, 721).equilibria == []


def test_portrait_over_two_periods_finds_four_zeros():
    por = sample_portrait(P, POST, 0.0, 4 * math.pi, 1000)
    assert [k for _, k in por.equilibria] == [EquilibriumKind.SEP, EquilibriumKind.UEP] * 2
    assert por.equilibria[2][0] - por.equilibria[0][0] == pytest.approx(2 * math.pi, abs=1e-10)


@pytest.mark.parametrize("args", [(0.0, 1.0, 1), (1.0, 0.0, 10), (1.0, 1.0, 10)])
def test_portrait_argument_checks(args):
    with pytest.raises(DomainError):
        sample_portrait(P, POST, *args)


def test_closed_form_rejects_equilibrium_regime():
    with pytest.raises(ValidityDomainError):
        closed_form_time(1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValidityDomainError):
        slip_period(1.0, 2.0)
    with pytest.raises(ValidityDomainError):
        ClosedFormCoeffs(1.0, 1.5, 0.0)


def test_closed_form_anchor_and_coeffs():
    c = ClosedFormCoeffs(9.3, 8.2416, 1.1845)
    assert c.time(1.1845) == pytest.approx(0.0, abs=1e-15)
    assert c.ratio == pytest.approx(8.2416 / 9.3)
    assert c.scale == pytest.approx(2 / (9.3 * math.sqrt(1 - (8.2416 / 9.3) ** 2)))


def test_zero_b_is_uniform_rotation():
    assert closed_form_time(3.0, 1.0, 2.0, 0.0) == pytest.approx(1.0, rel=1e-14)


def test_negative_a_runs_backwards():
    # with a < 0 and |a| > |b| the angle decreases; reaching a smaller angle
    # takes positive time
    t = closed_form_time(-1.0, 0.0, -3.0, 1.0)
    assert t > 0
    assert t == pytest.approx(quadrature_time(-3.0, 1.0, 0.0, -1.0), rel=1e-10)


def test_slip_period_case2():
    a = 9.3
    b = 9.3 / DURING.x_transfer
    assert slip_period(a, b) == pytest.approx(1.4582138, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(ab=ab_pairs, delta0=st.floats(min_value=-6.0, max_value=6.0), span=st.floats(0.01, 4 * math.pi))
def test_closed_form_matches_quadrature(ab, delta0, span):
    a, b = ab
    t = closed_form_time(delta0 + span, delta0, a, b)
    assert t == pytest.approx(quadrature_time(a, b, delta0, delta0 + span), rel=1e-9, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(ab=ab_pairs, delta0=st.floats(min_value=-6.0, max_value=6.0), n=st.integers(1, 6))
def test_full_turns_take_multiples_of_slip_period(ab, delta0, n):
    a, b = ab
    t = closed_form_time(delta0 + 2 * math.pi * n, delta0, a, b)
    assert t == pytest.approx(n * slip_period(a, b), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(ab=ab_pairs, delta0=st.floats(min_value=-6.0, max_value=6.0))
def test_closed_form_is_continuous_and_monotone(ab, delta0):
    a, b = ab
    d = delta0 + np.linspace(0.0, 4 * math.pi, 4001)
    t = closed_form_time(d, delta0, a, b)
    steps = np.diff(t)
    assert np.all(steps > 0)
    # largest possible step is the step size over the minimum rate a - b
    assert np.max(steps) <= (d[1] - d[0]) / (a - b) * (1 + 1e-9)


def test_closed_form_against_ode_case2():
    a, b = 9.3, 9.3 / DURING.x_transfer
    d0 = math.asin(PRE.x_transfer)
    targets = d0 + np.array([0.5, 1.0, 2 * math.pi, 3 * math.pi, 4 * math.pi])
    t_ode = ode_time_to_angles(a, b, d0, targets)
    t_cf = closed_form_time(targets, d0, a, b)
    assert np.max(np.abs(t_ode - t_cf)) <= 1e-6


def test_cca_and_cct_case2():
    d0 = find_equilibria(P, PRE).sep
    assert math.degrees(d0) == pytest.approx(67.868, abs=1e-3)
    assert math.degrees(cca(P, POST)) == pytest.approx(108.195, abs=1e-3)
    assert cct(P, DURING, POST, d0) == pytest.approx(0.5802698, abs=1e-6)


def test_cct_edge_cases():
    angle = cca(P, POST)
    assert cct(P, DURING, POST, angle) == 0.0
    with pytest.raises(DomainError):
        cct(P, DURING, POST, angle + 0.1)


def test_cca_without_post_fault_equilibrium():
    with pytest.raises(NoEquilibriumError):
        cca(P, NetworkState(StateLabel.POST_FAULT, 1.2))


def test_cct_decreases_with_weaker_fault_coupling():
    d0 = find_equilibria(P, PRE).sep
    weak = NetworkState(StateLabel.DURING_FAULT, 3.0)
    assert cct(P, weak, POST, d0) < cct(P, DURING, POST, d0)

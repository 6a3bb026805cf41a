import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockint import eos as E
from shockint.errors import ConfigError, NonPositiveDensity, OutOfRangeInvariants

from conftest import ALPHA_RIGHT, BETA_RIGHT, W15


def test_pressure_and_sound_speed_closed_forms():
    g2 = E.PolytropicEos(1.0, 2.0)
    assert E.pressure_and_sound_speed(g2, 2.0) == pytest.approx((4.0, 2.0), rel=1e-14)
    g3 = E.PolytropicEos(1.0 / 3.0, 3.0)
    assert E.pressure_and_sound_speed(g3, 1.0) == pytest.approx((1.0 / 3.0, 1.0),
                                                                rel=1e-14)
    g14 = E.PolytropicEos(1.0, 1.4)
    p, eta = E.pressure_and_sound_speed(g14, 1.0)
    assert p == pytest.approx(1.0, rel=1e-14)
    assert eta == pytest.approx(math.sqrt(1.4), rel=1e-14)


def test_pressure_rejects_nonpositive_density():
    g2 = E.PolytropicEos(1.0, 2.0)
    with pytest.raises(NonPositiveDensity):
        E.pressure_and_sound_speed(g2, 0.0)
    with pytest.raises(NonPositiveDensity):
        E.FluidState(rho=-1.0, w=0.0)


def test_riemann_maps_forward_and_inverse(eos2):
    pair = E.to_invariants(eos2, E.FluidState(2.0, 1.0))
    assert pair.alpha == pytest.approx(5.0, rel=1e-14)
    assert pair.beta == pytest.approx(3.0, rel=1e-14)
    back = E.from_invariants(eos2, E.RiemannPair(5.0, 3.0))
    assert back.rho == pytest.approx(2.0, rel=1e-14)
    assert back.w == pytest.approx(1.0, rel=1e-14)
    # the right ahead state of the symmetric scenario, by the forward map
    pair = E.to_invariants(eos2, E.FluidState(1.0, -W15))
    assert pair.alpha == pytest.approx(ALPHA_RIGHT, abs=1e-14)
    assert pair.beta == pytest.approx(BETA_RIGHT, abs=1e-14)


def test_riemann_maps_dispatcher(eos2):
    state = E.FluidState(1.3, -0.4)
    pair = E.riemann_maps(eos2, state)
    assert isinstance(pair, E.RiemannPair)
    state2 = E.riemann_maps(eos2, pair)
    assert isinstance(state2, E.FluidState)
    assert state2.rho == pytest.approx(state.rho, rel=1e-13)
    with pytest.raises(TypeError):
        E.riemann_maps(eos2, 1.0)


def test_inverse_rejects_out_of_range(eos2):
    with pytest.raises(OutOfRangeInvariants):
        E.from_invariants(eos2, E.RiemannPair(1.0, -2.0))


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(0.05, 20.0), w=st.floats(-5.0, 5.0),
       gamma=st.sampled_from([1.4, 2.0, 3.0]))
def test_round_trip_is_identity(rho, w, gamma):
    eos = E.PolytropicEos(1.0, gamma)
    back = E.from_invariants(eos, E.to_invariants(eos, E.FluidState(rho, w)))
    assert back.rho == pytest.approx(rho, rel=1e-12)
    assert back.w == pytest.approx(w, rel=1e-12, abs=1e-12)


def test_char_speeds_examples(eos2):
    speeds, _ = E.char_speeds_and_partials(eos2, E.RiemannPair(5.0, 3.0))
    assert speeds.c_out == pytest.approx(3.0, rel=1e-14)
    assert speeds.c_in == pytest.approx(-1.0, rel=1e-14)
    speeds, jet = E.char_speeds_and_partials(eos2, E.RiemannPair(4.0, 4.0))
    assert speeds.c_out == pytest.approx(2.0, rel=1e-14)
    assert speeds.c_in == pytest.approx(-2.0, rel=1e-14)
    # d c_out/d alpha = 1/2 + eta'(rho)*rho/(2 eta) = 3/4 for gamma = 2
    assert float(jet.co_a) == pytest.approx(0.75, rel=1e-14)


def _fd_speeds(eos, alpha, beta, h=1e-6):
    jp = E.char_jet(eos, alpha + h, beta)
    jm = E.char_jet(eos, alpha - h, beta)
    co_a = (jp.c_out - jm.c_out) / (2 * h)
    ci_a = (jp.c_in - jm.c_in) / (2 * h)
    jp = E.char_jet(eos, alpha, beta + h)
    jm = E.char_jet(eos, alpha, beta - h)
    co_b = (jp.c_out - jm.c_out) / (2 * h)
    ci_b = (jp.c_in - jm.c_in) / (2 * h)
    return co_a, co_b, ci_a, ci_b


def test_derived_partial_matches_finite_difference(eos2):
    co_a, _, _, _ = _fd_speeds(eos2, 4.0, 4.0)
    jet = E.char_jet(eos2, 4.0, 4.0)
    assert float(jet.co_a) == pytest.approx(float(co_a), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(1.0, 8.0), beta=st.floats(1.0, 8.0),
       gamma=st.sampled_from([1.4, 2.0, 3.0]))
def test_all_partials_match_finite_differences(alpha, beta, gamma):
    eos = E.PolytropicEos(1.0, gamma)
    jet = E.char_jet(eos, alpha, beta)
    co_a, co_b, ci_a, ci_b = _fd_speeds(eos, alpha, beta)
    assert float(jet.co_a) == pytest.approx(float(co_a), rel=1e-6)
    assert float(jet.co_b) == pytest.approx(float(co_b), rel=1e-6, abs=1e-9)
    assert float(jet.ci_a) == pytest.approx(float(ci_a), rel=1e-6, abs=1e-9)
    assert float(jet.ci_b) == pytest.approx(float(ci_b), rel=1e-6)
    # polytropic second partials vanish: first partials are constant
    jet2 = E.char_jet(eos, alpha + 0.1, beta - 0.05)
    assert float(jet2.co_a) == pytest.approx(float(jet.co_a), abs=1e-13)
    assert float(jet.co_ab) == 0.0
    assert float(jet.ci_bb) == 0.0


@settings(max_examples=40, deadline=None)
@given(alpha=st.floats(0.5, 9.0), beta=st.floats(0.5, 9.0))
def test_speed_gap_is_twice_sound_speed(alpha, beta):
    eos = E.PolytropicEos(1.0, 2.0)
    jet = E.char_jet(eos, alpha, beta)
    assert float(jet.c_out - jet.c_in) == pytest.approx(float(2 * jet.eta),
                                                        rel=1e-13)
    assert float(jet.eta) > 0.0


@settings(max_examples=40, deadline=None)
@given(r1=st.floats(0.05, 15.0), r2=st.floats(0.05, 15.0),
       gamma=st.sampled_from([1.4, 2.0, 3.0]))
def test_potential_strictly_increasing(r1, r2, gamma):
    if r1 == r2:
        r2 = r1 * 1.5
    eos = E.PolytropicEos(1.0, gamma)
    lo, hi = min(r1, r2), max(r1, r2)
    assert float(eos.potential(hi)) > float(eos.potential(lo))


def test_polytropic_rejects_bad_parameters():
    with pytest.raises(ConfigError):
        E.PolytropicEos(kappa=1.0, gamma=1.0)
    with pytest.raises(ConfigError):
        E.PolytropicEos(kappa=-1.0, gamma=2.0)


def test_analytic_hook_matches_polytrope(eos2):
    hook = E.AnalyticEos(
        p=lambda r: r * r,
        dp_drho=lambda r: 2.0 * r,
        potential=lambda r: 2.0 * math.sqrt(2.0 * r),
        potential_inverse=lambda s: s * s / 8.0,
        d2p_drho2=lambda r: 2.0,
        rho_check=(1e-2, 10.0),
    )
    for alpha, beta in [(4.0, 4.0), (5.0, 3.0), (3.5, 4.5)]:
        ja = E.char_jet(hook, alpha, beta)
        jb = E.char_jet(eos2, alpha, beta)
        assert float(ja.c_out) == pytest.approx(float(jb.c_out), rel=1e-12)
        assert float(ja.co_a) == pytest.approx(float(jb.co_a), rel=1e-9)
        assert abs(float(ja.co_ab)) < 1e-6


def test_analytic_hook_inverts_potential_by_newton():
    hook = E.AnalyticEos(
        p=lambda r: r * r,
        dp_drho=lambda r: 2.0 * r,
        potential=lambda r: 2.0 * math.sqrt(2.0 * r),
        rho_check=(1e-2, 10.0),
    )
    st_back = E.from_invariants(hook, E.to_invariants(hook, E.FluidState(2.0, 1.0)))
    assert st_back.rho == pytest.approx(2.0, abs=1e-12)


def test_analytic_hook_rejects_bad_laws():
    with pytest.raises(ConfigError):
        E.AnalyticEos(p=lambda r: -r, dp_drho=lambda r: -1.0,
                      potential=lambda r: r)
    with pytest.raises(ConfigError):
        E.AnalyticEos(p=lambda r: r, dp_drho=lambda r: 1.0,
                      potential=lambda r: -r)

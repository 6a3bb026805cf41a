import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shockint import eos as E
from shockint import jump as J
from shockint.errors import DegenerateJump, NewtonDiverged, NotOnHugoniot

from conftest import A_EXACT, ALPHA_RIGHT, BETA_RIGHT, W15


def pair_of(eos, rho, w):
    return E.to_invariants(eos, E.FluidState(rho, w))


def jump_pair(eos, behind, ahead):
    return J.JumpPair(behind=pair_of(eos, *behind), ahead=pair_of(eos, *ahead))


def raw_residual(eos, rho_p, w_p, rho_m, w_m):
    """Independent oracle for the jump residual, in primitive variables."""
    p = lambda r: float(eos.pressure(r))
    j_mom = rho_p * w_p - rho_m * w_m
    j_flux = (rho_p * w_p**2 + p(rho_p)) - (rho_m * w_m**2 + p(rho_m))
    return j_mom**2 - j_flux * (rho_p - rho_m)


def bisect_ahead_velocity(eos, rho_p, w_p, rho_m, lo, hi):
    """Bisection oracle: the ahead velocity closing the jump residual."""
    f = lambda w: raw_residual(eos, rho_p, w_p, rho_m, w)
    assert f(lo) * f(hi) <= 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_residual_vanishes_on_hugoniot_point(eos2):
    # oracle: bisection on w_minus of the primitive residual
    w_m = bisect_ahead_velocity(eos2, 2.0, 0.0, 1.0, -2.0, -0.5)
    assert w_m == pytest.approx(-W15, abs=1e-12)
    jp = jump_pair(eos2, (2.0, 0.0), (1.0, -W15))
    assert abs(J.hugoniot_residual(eos2, jp)) < 1e-12


def test_residual_trivial_cases(eos2):
    same = jump_pair(eos2, (1.7, 0.3), (1.7, 0.3))
    assert J.hugoniot_residual(eos2, same) == pytest.approx(0.0, abs=1e-13)
    static = jump_pair(eos2, (2.0, 0.0), (1.0, 0.0))
    assert J.hugoniot_residual(eos2, static) == pytest.approx(-3.0, rel=1e-12)


def test_shock_speed_with_mass_flux_oracle(eos2):
    jp = jump_pair(eos2, (2.0, 0.0), (1.0, -W15))
    v = J.shock_speed(eos2, jp)
    assert v == pytest.approx(W15, rel=1e-12)
    # independent oracle: mass flux m^2 = [p]*rho+*rho-/[rho], V = w+ - m/rho+
    m2 = (4.0 - 1.0) * 2.0 * 1.0 / (2.0 - 1.0)
    candidates = [0.0 - s * math.sqrt(m2) / 2.0 for s in (+1.0, -1.0)]
    assert min(abs(v - c) for c in candidates) < 1e-12
    # mirror: flipping the ahead velocity flips the speed
    jp_m = jump_pair(eos2, (2.0, 0.0), (1.0, +W15))
    assert J.shock_speed(eos2, jp_m) == pytest.approx(-W15, rel=1e-12)


def test_shock_speed_degenerate(eos2):
    with pytest.raises(DegenerateJump):
        J.shock_speed(eos2, jump_pair(eos2, (2.0, 0.0), (2.0, 1.0)))


def test_residual_partials_match_finite_differences(eos2):
    jp = jump_pair(eos2, (2.1, 0.13), (1.2, -0.9))
    grads = J.residual_partials(eos2, jp)
    h = 1e-6
    b, a = jp.behind, jp.ahead
    for k, (da, db, dc, dd) in enumerate([(h, 0, 0, 0), (0, h, 0, 0),
                                          (0, 0, h, 0), (0, 0, 0, h)]):
        plus = J.JumpPair(E.RiemannPair(b.alpha + da, b.beta + db),
                          E.RiemannPair(a.alpha + dc, a.beta + dd))
        minus = J.JumpPair(E.RiemannPair(b.alpha - da, b.beta - db),
                           E.RiemannPair(a.alpha - dc, a.beta - dd))
        fd = (J.hugoniot_residual(eos2, plus)
              - J.hugoniot_residual(eos2, minus)) / (2 * h)
        assert grads[k] == pytest.approx(fd, rel=2e-6)


def test_solve_hugoniot_symmetric_roots(eos2):
    ahead_left = E.RiemannPair(BETA_RIGHT, ALPHA_RIGHT)
    assert J.solve_hugoniot(eos2, J.ShockSide.LEFT, 4.0, ahead_left,
                            seed=4.3) == pytest.approx(4.0, abs=1e-11)
    ahead_right = E.RiemannPair(ALPHA_RIGHT, BETA_RIGHT)
    assert J.solve_hugoniot(eos2, J.ShockSide.RIGHT, 4.0, ahead_right,
                            seed=3.7) == pytest.approx(4.0, abs=1e-11)
    # returned root closes the residual
    root = J.solve_hugoniot(eos2, J.ShockSide.LEFT, 4.0, ahead_left, seed=4.3)
    jp = J.JumpPair(E.RiemannPair(root, 4.0), ahead_left)
    assert abs(J.hugoniot_residual(eos2, jp)) <= 1e-12 * J.residual_scale(eos2, jp)


def test_solve_hugoniot_zero_jump_root(eos2):
    behind = pair_of(eos2, 1.5, 0.2)
    root = J.solve_hugoniot(eos2, J.ShockSide.LEFT, behind.beta, behind,
                            seed=behind.alpha)
    assert root == pytest.approx(behind.alpha, abs=1e-10)


def test_solve_hugoniot_diverges_outside_region(eos2):
    ahead = pair_of(eos2, 1.0, 0.0)
    with pytest.raises(NewtonDiverged):
        J.solve_hugoniot(eos2, J.ShockSide.LEFT, 4.0, ahead, seed=-10.0)


def test_jump_coefficients_origin_values(eos2):
    behind = E.RiemannPair(4.0, 4.0)
    jp_l = J.JumpPair(behind, E.RiemannPair(BETA_RIGHT, ALPHA_RIGHT))
    jp_r = J.JumpPair(behind, E.RiemannPair(ALPHA_RIGHT, BETA_RIGHT))
    f1, _, _ = J.jump_coefficients(eos2, J.ShockSide.LEFT, jp_l)
    f2, _, _ = J.jump_coefficients(eos2, J.ShockSide.RIGHT, jp_r)
    assert f1 == pytest.approx(-A_EXACT, rel=1e-10)
    assert f2 == pytest.approx(-A_EXACT, rel=1e-10)
    assert f1 * f2 == pytest.approx(A_EXACT**2, abs=1e-12)


def _coef_fd_oracle(eos, side, behind_known, ahead, root, h=1e-6):
    """Finite differences of the Hugoniot map, re-solved by damped Newton."""
    def solve(known, a_m, b_m):
        return J.solve_hugoniot(eos, side, known, E.RiemannPair(a_m, b_m),
                                seed=root)
    f = (solve(behind_known + h, ahead.alpha, ahead.beta)
         - solve(behind_known - h, ahead.alpha, ahead.beta)) / (2 * h)
    m1 = (solve(behind_known, ahead.alpha + h, ahead.beta)
          - solve(behind_known, ahead.alpha - h, ahead.beta)) / (2 * h)
    m2 = (solve(behind_known, ahead.alpha, ahead.beta + h)
          - solve(behind_known, ahead.alpha, ahead.beta - h)) / (2 * h)
    return f, m1, m2


def test_jump_coefficients_match_map_derivatives(eos2):
    behind = E.RiemannPair(4.0, 4.0)
    ahead = E.RiemannPair(BETA_RIGHT, ALPHA_RIGHT)
    jp = J.JumpPair(behind, ahead)
    f, m1, m2 = J.jump_coefficients(eos2, J.ShockSide.LEFT, jp)
    f_fd, m1_fd, m2_fd = _coef_fd_oracle(eos2, J.ShockSide.LEFT, 4.0, ahead, 4.0)
    assert f == pytest.approx(f_fd, rel=1e-5)
    assert m1 == pytest.approx(m1_fd, rel=1e-5)
    assert m2 == pytest.approx(m2_fd, rel=1e-5)


def test_jump_coefficients_continuous_on_branch(eos2):
    # F stays negative and continuous along a sampled Hugoniot branch
    prev = None
    for rho_m in np.linspace(0.55, 0.95, 17):
        w_m = bisect_ahead_velocity(eos2, 2.0, 0.0, float(rho_m), -3.0, -1e-9)
        jp = jump_pair(eos2, (2.0, 0.0), (float(rho_m), w_m))
        f, _, _ = J.jump_coefficients(eos2, J.ShockSide.LEFT, jp)
        assert f < 0.0
        if prev is not None:
            assert abs(f - prev) < 0.2 * max(abs(f), abs(prev))
        prev = f


def test_jump_coefficients_requires_hugoniot(eos2):
    jp = jump_pair(eos2, (2.0, 0.0), (1.0, 0.0))
    with pytest.raises(NotOnHugoniot):
        J.jump_coefficients(eos2, J.ShockSide.LEFT, jp)


def test_determinism_check_example(eos2):
    jp = jump_pair(eos2, (2.0, 0.0), (1.0, +W15))
    out = J.determinism_check(eos2, J.ShockSide.LEFT, jp)
    assert out["ok"]
    # oracle: the same inequalities evaluated directly in primitives
    v = -W15
    assert out["margins"][0] == pytest.approx(v - (0.0 - 2.0), rel=1e-12)
    assert out["margins"][1] == pytest.approx((W15 - math.sqrt(2.0)) - v,
                                              rel=1e-12)
    assert out["margins"][0] == pytest.approx(0.7752551286084109, abs=1e-12)
    assert out["margins"][1] == pytest.approx(1.0352761804100827, abs=1e-12)


def test_determinism_mirror_and_orientation(eos2):
    jp = jump_pair(eos2, (2.0, 0.0), (1.0, +W15))
    out = J.determinism_check(eos2, J.ShockSide.LEFT, jp)
    jp_m = jump_pair(eos2, (2.0, 0.0), (1.0, -W15))
    out_m = J.determinism_check(eos2, J.ShockSide.RIGHT, jp_m)
    assert out_m["ok"]
    assert out_m["margins"][0] == pytest.approx(out["margins"][1], rel=1e-12)
    assert out_m["margins"][1] == pytest.approx(out["margins"][0], rel=1e-12)
    swapped = J.JumpPair(behind=jp.ahead, ahead=jp.behind)
    assert not J.determinism_check(eos2, J.ShockSide.LEFT, swapped)["ok"]


@settings(max_examples=30, deadline=None)
@given(rho_p=st.floats(0.8, 3.0), w_p=st.floats(-1.0, 1.0),
       ratio=st.floats(0.35, 0.9), boost=st.floats(-2.0, 2.0))
def test_galilean_covariance(rho_p, w_p, ratio, boost):
    eos = E.PolytropicEos(1.0, 2.0)
    rho_m = rho_p * ratio
    w_m = bisect_ahead_velocity(eos, rho_p, w_p, rho_m, w_p, w_p + 10.0)
    jp = jump_pair(eos, (rho_p, w_p), (rho_m, w_m))
    jp_b = jump_pair(eos, (rho_p, w_p + boost), (rho_m, w_m + boost))
    assert J.hugoniot_residual(eos, jp_b) == pytest.approx(
        J.hugoniot_residual(eos, jp), abs=1e-12 * J.residual_scale(eos, jp))
    assert J.shock_speed(eos, jp_b) == pytest.approx(
        J.shock_speed(eos, jp) + boost, abs=1e-10)
    d0 = J.determinism_check(eos, J.ShockSide.LEFT, jp)
    d1 = J.determinism_check(eos, J.ShockSide.LEFT, jp_b)
    assert d0["ok"] == d1["ok"]
    assert d1["margins"][0] == pytest.approx(d0["margins"][0], abs=1e-12)
    assert d1["margins"][1] == pytest.approx(d0["margins"][1], abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(rho_p=st.floats(0.8, 3.0), w_p=st.floats(-1.0, 1.0),
       ratio=st.floats(0.35, 0.9))
def test_mirror_covariance(rho_p, w_p, ratio):
    eos = E.PolytropicEos(1.0, 2.0)
    rho_m = rho_p * ratio
    w_m = bisect_ahead_velocity(eos, rho_p, w_p, rho_m, w_p, w_p + 10.0)
    jp = jump_pair(eos, (rho_p, w_p), (rho_m, w_m))
    jp_mirror = jump_pair(eos, (rho_p, -w_p), (rho_m, -w_m))
    assert J.shock_speed(eos, jp_mirror) == pytest.approx(
        -J.shock_speed(eos, jp), abs=1e-11)
    d_r = J.determinism_check(eos, J.ShockSide.RIGHT, jp)
    d_l = J.determinism_check(eos, J.ShockSide.LEFT, jp_mirror)
    assert d_r["ok"] == d_l["ok"]
    assert d_l["margins"][0] == pytest.approx(d_r["margins"][1], abs=1e-11)
    assert d_l["margins"][1] == pytest.approx(d_r["margins"][0], abs=1e-11)

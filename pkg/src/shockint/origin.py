"""Interaction-point solve: the four jump conditions across both emerged
shocks with a common behind state, frame normalization, and the geometric and
derivative constants that seed the fixed-point iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import eos as eos_mod
from .eos import FluidState, RiemannPair
from .errors import AmbiguousRoot, DeterminismViolated, NoAdmissibleRoot
from .jump import JumpPair, ShockSide, jump_coefficients

_NEWTON_TOL = 1e-12
_SCAN_SHAPE = (64, 64)


class OriginSolution(NamedTuple):
    rho0: float
    w0: float
    V1: float
    V2: float


@dataclass(frozen=True)
class InteractionPointData:
    """Everything determined at the interaction point, in the frame where the
    behind velocity vanishes."""

    rho0: float
    eta0: float
    beta0: float
    V0_left: float
    V0_right: float
    a: float
    Gamma0: float
    alpha0p: float
    beta0p: float
    frame_boost: float

    def as_dict(self):
        return {
            "rho0": self.rho0, "eta0": self.eta0, "beta0": self.beta0,
            "V0_left": self.V0_left, "V0_right": self.V0_right,
            "a": self.a, "Gamma0": self.Gamma0,
            "alpha0p": self.alpha0p, "beta0p": self.beta0p,
            "frame_boost": self.frame_boost,
        }


def _jump_residual(eos, rho_p, w_p, ahead: FluidState):
    """I and its partials with respect to (rho+, w+) for one shock."""
    p_p = float(eos.pressure(rho_p))
    eta_p = float(eos.sound_speed(rho_p))
    rm, wm = ahead.rho, ahead.w
    pm = float(eos.pressure(rm))
    j_rho = rho_p - rm
    j_mom = rho_p * w_p - rm * wm
    j_flux = (rho_p * w_p * w_p + p_p) - (rm * wm * wm + pm)
    res = j_mom * j_mom - j_flux * j_rho
    d_rho = 2.0 * j_mom * w_p - (w_p * w_p + eta_p * eta_p) * j_rho - j_flux
    d_w = 2.0 * rho_p * (j_mom - w_p * j_rho)
    scale = max(1.0, abs(j_flux * j_rho))
    return res, d_rho, d_w, scale


def _shock_speeds(rho_p, w_p, left: FluidState, right: FluidState):
    j1 = rho_p - left.rho
    j2 = rho_p - right.rho
    if abs(j1) < 1e-12 * max(rho_p, left.rho) or abs(j2) < 1e-12 * max(rho_p, right.rho):
        return None
    v1 = (rho_p * w_p - left.rho * left.w) / j1
    v2 = (rho_p * w_p - right.rho * right.w) / j2
    return v1, v2


def _is_admissible(eos, rho_p, w_p, left, right):
    """Determinism on both shocks plus the speed-ordering V1 < w+ < V2."""
    if rho_p <= 0.0:
        return False
    speeds = _shock_speeds(rho_p, w_p, left, right)
    if speeds is None:
        return False
    v1, v2 = speeds
    eta_p = float(eos.sound_speed(rho_p))
    eta_l = float(eos.sound_speed(left.rho))
    eta_r = float(eos.sound_speed(right.rho))
    if not v1 < w_p < v2:
        return False
    ok_left = (w_p - eta_p) < v1 < (left.w - eta_l)
    ok_right = (right.w + eta_r) < v2 < (w_p + eta_p)
    return ok_left and ok_right


def _newton2(eos, rho, w, left, right, max_iter=60):
    """Damped 2x2 Newton on (I1, I2); returns (rho, w) or None."""
    def full_residual(r, ww):
        i1, d1r, d1w, s1 = _jump_residual(eos, r, ww, left)
        i2, d2r, d2w, s2 = _jump_residual(eos, r, ww, right)
        return (i1, i2), ((d1r, d1w), (d2r, d2w)), (s1, s2)

    if rho <= 0.0:
        return None
    (i1, i2), jac, (s1, s2) = full_residual(rho, w)
    for _ in range(max_iter):
        if abs(i1) <= _NEWTON_TOL * s1 and abs(i2) <= _NEWTON_TOL * s2:
            return rho, w
        det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
        if det == 0.0 or not math.isfinite(det):
            return None
        drho = -(i1 * jac[1][1] - i2 * jac[0][1]) / det
        dw = -(jac[0][0] * i2 - jac[1][0] * i1) / det
        best = None
        lam = 1.0
        for _ in range(9):
            r_new, w_new = rho + lam * drho, w + lam * dw
            if r_new > 0.0:
                (n1, n2), jac_new, scales_new = full_residual(r_new, w_new)
                if max(abs(n1) / s1, abs(n2) / s2) < max(abs(i1) / s1, abs(i2) / s2):
                    best = (r_new, w_new, n1, n2, jac_new, scales_new)
                    break
            lam *= 0.5
        if best is None:
            return None
        rho, w, i1, i2, jac, (s1, s2) = best
    return None


def solve_interaction_point(eos, left_state: FluidState, right_state: FluidState,
                            seed: FluidState | None = None) -> OriginSolution:
    """Solve the interaction-point jump conditions for the common behind state.

    Newton runs from the caller's seed (default: rho = 1.5*max ahead density,
    w = mean ahead velocity) and, independently, from every local minimum of
    the residual on a coarse scan over [rho_max, 4*rho_max] x [w_min, w_max].
    Only roots satisfying both determinism conditions and V1 < 0 < V2 are
    accepted; several admissible roots abort the run.
    """
    rho_max = max(left_state.rho, right_state.rho)
    if seed is None:
        seed = FluidState(rho=1.5 * rho_max, w=0.5 * (left_state.w + right_state.w))

    candidates = []

    def push(root):
        if root is None:
            return
        r, w = root
        for rr, ww in candidates:
            if abs(rr - r) < 1e-8 * max(1.0, rr) and abs(ww - w) < 1e-8:
                return
        candidates.append((r, w))

    push(_newton2(eos, seed.rho, seed.w, left_state, right_state))

    rhos = np.linspace(rho_max, 4.0 * rho_max, _SCAN_SHAPE[0])
    w_lo = min(left_state.w, right_state.w)
    w_hi = max(left_state.w, right_state.w)
    if w_hi - w_lo < 1e-12:
        w_lo, w_hi = w_lo - 1.0, w_hi + 1.0
    ws = np.linspace(w_lo, w_hi, _SCAN_SHAPE[1])
    res = np.empty(_SCAN_SHAPE)
    for i, r in enumerate(rhos):
        for k, w in enumerate(ws):
            i1, _, _, s1 = _jump_residual(eos, r, w, left_state)
            i2, _, _, s2 = _jump_residual(eos, r, w, right_state)
            res[i, k] = max(abs(i1) / s1, abs(i2) / s2)
    interior = res[1:-1, 1:-1]
    is_min = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dk in (-1, 0, 1):
            if di == dk == 0:
                continue
            is_min &= interior <= res[1 + di:_SCAN_SHAPE[0] - 1 + di,
                                      1 + dk:_SCAN_SHAPE[1] - 1 + dk]
    order = np.argsort(interior[is_min])
    mins = np.argwhere(is_min)[order][:8]
    for i, k in mins:
        push(_newton2(eos, float(rhos[i + 1]), float(ws[k + 1]),
                      left_state, right_state))

    admissible = [c for c in candidates
                  if _is_admissible(eos, c[0], c[1], left_state, right_state)]
    if not admissible:
        raise NoAdmissibleRoot(
            "no interaction-point solution passes determinism and V1 < 0 < V2; "
            "the data do not describe two colliding shocks"
        )
    if len(admissible) > 1:
        raise AmbiguousRoot(f"multiple admissible behind states: {admissible}")
    rho0, w0 = admissible[0]
    v1, v2 = _shock_speeds(rho0, w0, left_state, right_state)
    return OriginSolution(rho0=rho0, w0=w0, V1=v1, V2=v2)


def normalize_frame(eos, left_field, right_field, sol: OriginSolution):
    """Boost everything by -w0 so the behind velocity at the origin is zero.

    Galilean invariance of the jump conditions keeps residuals and
    determinism margins unchanged; the boost is recorded for reporting.
    """
    b = sol.w0
    if b != 0.0:
        left_field = left_field.boosted(b)
        right_field = right_field.boosted(b)
    eta0 = float(eos.sound_speed(sol.rho0))
    beta0 = float(eos.potential(sol.rho0))
    partial = {
        "rho0": sol.rho0, "eta0": eta0, "beta0": beta0,
        "V0_left": sol.V1 - b, "V0_right": sol.V2 - b,
        "frame_boost": b,
    }
    return left_field, right_field, partial


def geometry_constants(point: dict):
    """Coordinate ratio a and boundary coefficient Gamma0 from the normalized
    interaction-point data; both signs are asserted."""
    eta0, v1, v2 = point["eta0"], point["V0_left"], point["V0_right"]
    a = ((eta0 + v1) / (eta0 - v1)) * ((eta0 - v2) / (eta0 + v2))
    gamma0 = -(eta0 + v1) / (eta0 - v1)
    if not 0.0 < a < 1.0:
        raise DeterminismViolated(f"a={a} outside (0, 1)")
    if not gamma0 < 0.0:
        raise DeterminismViolated(f"Gamma0={gamma0} not negative")
    return a, gamma0


def initial_derivatives(eos, point: dict, left_field, right_field):
    """First-derivative seeds (alpha0', beta0') of the behind invariants.

    Combines the Hugoniot-map coefficients at the origin with the ahead-trace
    derivatives induced by the initial coordinate slopes; the 2x2 system has
    determinant 1 - a^3 > 0.
    """
    beta0, eta0, a, gamma0 = (point["beta0"], point["eta0"],
                              point["a"], point["Gamma0"])
    behind = RiemannPair(beta0, beta0)

    al, bl = left_field.eval(0.0, 0.0)
    ar, br = right_field.eval(0.0, 0.0)
    f1, m11, m21 = jump_coefficients(
        eos, ShockSide.LEFT, JumpPair(behind=behind,
                                      ahead=RiemannPair(float(al), float(bl))))
    f2, m12, m22 = jump_coefficients(
        eos, ShockSide.RIGHT, JumpPair(behind=behind,
                                       ahead=RiemannPair(float(ar), float(br))))

    at_l, ax_l, bt_l, bx_l = (float(v) for v in left_field.partials(0.0, 0.0))
    at_r, ax_r, bt_r, bx_r = (float(v) for v in right_field.partials(0.0, 0.0))

    # trace slopes of the shocks at the origin, left in u, right in v
    dt_l = (1.0 - 1.0 / gamma0) / eta0
    dx_l = 1.0 / gamma0 + 1.0
    dt_r = (1.0 - a / gamma0) / eta0
    dx_r = a / gamma0 + 1.0

    dalpha_m_l = at_l * dt_l + ax_l * dx_l
    dbeta_m_l = bt_l * dt_l + bx_l * dx_l
    dalpha_m_r = at_r * dt_r + ax_r * dx_r
    dbeta_m_r = bt_r * dt_r + bx_r * dx_r

    a0 = m11 * dalpha_m_l + m21 * dbeta_m_l
    b0 = m12 * dalpha_m_r + m22 * dbeta_m_r

    det = 1.0 - a * f1 * f2
    alpha0p = (a0 + f1 * b0) / det
    beta0p = (a * f2 * a0 + b0) / det
    return alpha0p, beta0p


def build_interaction_data(eos, left_field, right_field, seed=None):
    """Full origin pipeline: solve, normalize, geometry, derivative seeds.

    Returns the interaction-point data together with the frame-normalized
    ahead fields.
    """
    al, bl = left_field.eval(0.0, 0.0)
    ar, br = right_field.eval(0.0, 0.0)
    left_state = eos_mod.from_invariants(eos, RiemannPair(float(al), float(bl)))
    right_state = eos_mod.from_invariants(eos, RiemannPair(float(ar), float(br)))
    sol = solve_interaction_point(eos, left_state, right_state, seed=seed)
    left_field, right_field, partial = normalize_frame(eos, left_field, right_field, sol)
    a, gamma0 = geometry_constants(partial)
    partial["a"], partial["Gamma0"] = a, gamma0
    alpha0p, beta0p = initial_derivatives(eos, partial, left_field, right_field)
    ipd = InteractionPointData(
        rho0=partial["rho0"], eta0=partial["eta0"], beta0=partial["beta0"],
        V0_left=partial["V0_left"], V0_right=partial["V0_right"],
        a=a, Gamma0=gamma0, alpha0p=alpha0p, beta0p=beta0p,
        frame_boost=partial["frame_boost"],
    )
    return ipd, left_field, right_field

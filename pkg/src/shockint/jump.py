"""Rankine-Hugoniot machinery in Riemann-invariant variables.

The scalar jump residual

    J(a+, b+, a-, b-) = [rho*w]^2 - [rho*w^2 + p]*[rho]

(brackets denote behind-minus-ahead differences) vanishes exactly on the
Hugoniot locus; together with V = [rho*w]/[rho] it is equivalent to the two
conservation jump conditions.  The implicit maps H1/H2 return the missing
behind invariant on a shock given the other behind invariant and the ahead
state; their derivative coefficients (F, M1, M2) drive the linearized
boundary coupling of the interaction scheme.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import eos as eos_mod
from .eos import RiemannPair
from .errors import (
    DegenerateJump,
    NewtonDiverged,
    NotOnHugoniot,
    SingularJacobian,
    SonicDegeneracy,
)

DEGENERATE_RTOL = 1e-14
ON_HUGONIOT_RTOL = 1e-8


class ShockSide(enum.Enum):
    LEFT = 1    # left-moving emerged shock
    RIGHT = 2   # right-moving emerged shock


@dataclass(frozen=True)
class JumpPair:
    behind: RiemannPair
    ahead: RiemannPair


def _primitive(eos, pair: RiemannPair):
    rho, w, eta = eos_mod.invariants_arrays(eos, pair.alpha, pair.beta)
    return float(rho), float(w), float(eta), float(eos.pressure(rho))


def _jumps(eos, jp: JumpPair):
    rp, wp, ep, pp = _primitive(eos, jp.behind)
    rm, wm, em, pm = _primitive(eos, jp.ahead)
    j_rho = rp - rm
    j_mom = rp * wp - rm * wm
    j_flux = (rp * wp * wp + pp) - (rm * wm * wm + pm)
    return (rp, wp, ep), (rm, wm, em), j_rho, j_mom, j_flux


def hugoniot_residual(eos, jp: JumpPair) -> float:
    """J = [rho*w]^2 - [rho*w^2+p]*[rho]; zero on the Hugoniot locus."""
    _, _, j_rho, j_mom, j_flux = _jumps(eos, jp)
    return j_mom * j_mom - j_flux * j_rho


def residual_scale(eos, jp: JumpPair) -> float:
    """Natural magnitude of J used for relative tolerances."""
    _, _, j_rho, _, j_flux = _jumps(eos, jp)
    return max(1.0, abs(j_flux * j_rho))


def shock_speed(eos, jp: JumpPair) -> float:
    """V = [rho*w]/[rho]."""
    (rp, _, _), (rm, _, _), j_rho, j_mom, _ = _jumps(eos, jp)
    if abs(j_rho) < DEGENERATE_RTOL * max(rp, rm):
        raise DegenerateJump(f"|[rho]|={abs(j_rho)} too small for a shock speed")
    return j_mom / j_rho


def residual_partials(eos, jp: JumpPair):
    """Exact partial derivatives (dJ/da+, dJ/db+, dJ/da-, dJ/db-).

    Valid off the Hugoniot locus; on it they reduce to the closed forms
    -([rho]*rho+/2eta+)*(c_out+ - V)^2 and companions.
    """
    (rp, wp, ep), (rm, wm, em), j_rho, j_mom, j_flux = _jumps(eos, jp)
    dJ_drp = 2.0 * j_mom * wp - (wp * wp + ep * ep) * j_rho - j_flux
    dJ_dwp = 2.0 * rp * (j_mom - wp * j_rho)
    dJ_drm = -2.0 * j_mom * wm + (wm * wm + em * em) * j_rho + j_flux
    dJ_dwm = -2.0 * rm * (j_mom - wm * j_rho)
    da_p = rp / (2.0 * ep) * dJ_drp + 0.5 * dJ_dwp
    db_p = rp / (2.0 * ep) * dJ_drp - 0.5 * dJ_dwp
    da_m = rm / (2.0 * em) * dJ_drm + 0.5 * dJ_dwm
    db_m = rm / (2.0 * em) * dJ_drm - 0.5 * dJ_dwm
    return da_p, db_p, da_m, db_m


def solve_hugoniot(eos, side: ShockSide, known_behind: float, ahead: RiemannPair,
                   seed: float, tol: float = 1e-12, max_iter: int = 50) -> float:
    """Solve J = 0 for the missing behind invariant.

    side LEFT:  returns alpha+ from (beta+=known_behind, ahead)   [H1]
    side RIGHT: returns beta+  from (alpha+=known_behind, ahead)  [H2]

    Newton from ``seed`` with step halving (up to 8 times) whenever |J| does
    not decrease, constrained to the density-positive region.  The root is
    polished past the tolerance while |J| keeps strictly decreasing.
    """
    floor = eos_mod._potential_floor(eos)

    def pair_of(x):
        if side is ShockSide.LEFT:
            return RiemannPair(alpha=x, beta=known_behind)
        return RiemannPair(alpha=known_behind, beta=x)

    def residual_and_slope(x):
        jp = JumpPair(behind=pair_of(x), ahead=ahead)
        j = hugoniot_residual(eos, jp)
        da_p, db_p, _, _ = residual_partials(eos, jp)
        return j, (da_p if side is ShockSide.LEFT else db_p), jp

    x = float(seed)
    if 0.5 * (x + known_behind) <= floor:
        raise NewtonDiverged("seed outside the density-positive region")
    j, slope, jp = residual_and_slope(x)
    scale = residual_scale(eos, jp)
    for _ in range(max_iter):
        if abs(j) <= tol * scale:
            # polish while the residual strictly decreases
            for _ in range(3):
                if slope == 0.0:
                    break
                x_new = x - j / slope
                if 0.5 * (x_new + known_behind) <= floor:
                    break
                j_new, slope_new, _ = residual_and_slope(x_new)
                if abs(j_new) < abs(j):
                    x, j, slope = x_new, j_new, slope_new
                else:
                    break
            return x
        deriv_scale = max(1.0, abs(j) / max(abs(x), 1.0))
        if abs(slope) < 1e-14 * deriv_scale:
            raise SingularJacobian(
                "dJ vanished at the current iterate (sonic degeneracy)"
            )
        step = -j / slope
        accepted = False
        for _ in range(9):
            x_new = x + step
            if 0.5 * (x_new + known_behind) > floor:
                j_new, slope_new, jp_new = residual_and_slope(x_new)
                if abs(j_new) < abs(j):
                    x, j, slope = x_new, j_new, slope_new
                    scale = residual_scale(eos, jp_new)
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            raise NewtonDiverged(
                f"damped Newton stalled at x={x}, |J|={abs(j)}"
            )
    raise NewtonDiverged(f"no root after {max_iter} iterations, |J|={abs(j)}")


def jump_coefficients(eos, side: ShockSide, jp: JumpPair):
    """(F, M1, M2): partial derivatives of the Hugoniot map H1/H2.

    F follows the closed form -((V-c_in+)/(c_out+-V))^2 (side LEFT) or its
    reciprocal-squared companion (side RIGHT); M1, M2 are ratios of the exact
    residual partials.  Requires jp to lie on the Hugoniot within the module
    tolerance and V strictly between the behind characteristic speeds.
    """
    j = hugoniot_residual(eos, jp)
    scale = residual_scale(eos, jp)
    if abs(j) > ON_HUGONIOT_RTOL * scale:
        raise NotOnHugoniot(f"|J|={abs(j)} exceeds {ON_HUGONIOT_RTOL}*scale")
    v = shock_speed(eos, jp)
    (rp, wp, ep), _, _, _, _ = _jumps(eos, jp)
    c_out_p = wp + ep
    c_in_p = wp - ep
    lo_gap = v - c_in_p
    hi_gap = c_out_p - v
    if lo_gap <= 0.0 or hi_gap <= 0.0:
        raise SonicDegeneracy(
            f"V={v} not strictly between behind characteristic speeds"
        )
    if side is ShockSide.LEFT:
        f = -((lo_gap / hi_gap) ** 2)
    else:
        f = -((hi_gap / lo_gap) ** 2)
    da_p, db_p, da_m, db_m = residual_partials(eos, jp)
    denom = da_p if side is ShockSide.LEFT else db_p
    if denom == 0.0:
        raise SonicDegeneracy("residual partial behind the shock vanished")
    m1 = -da_m / denom
    m2 = -db_m / denom
    return f, m1, m2


def determinism_check(eos, side: ShockSide, jp: JumpPair) -> dict:
    """Admissibility of the shock: supersonic relative to the state ahead,
    subsonic relative to the state behind.

    side LEFT:  c_in+ < V < c_in-      side RIGHT: c_out- < V < c_out+
    Returns {"ok": bool, "margins": (V-lower, upper-V)}.
    """
    v = shock_speed(eos, jp)
    (rp, wp, ep), (rm, wm, em), _, _, _ = _jumps(eos, jp)
    if side is ShockSide.LEFT:
        lower, upper = wp - ep, wm - em
    else:
        lower, upper = wm + em, wp + ep
    margins = (v - lower, upper - v)
    return {"ok": margins[0] > 0.0 and margins[1] > 0.0, "margins": margins}

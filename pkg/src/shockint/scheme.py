"""Fixed-point iteration for the state between the emerged shocks.

One sweep carries the triple (alpha_plus on the left shock, beta_plus on the
right shock, x with its derivative fields), reconstructs t from the
characteristic relations, traces both shocks through the ahead developments,
assembles the interior source M = mu*x_u + nu*x_v and the boundary sources
Lambda/Phi, rebuilds x from its double-integral representation and updates
the behind invariants through the Hugoniot maps.  Derivative fields are
carried analytically from their own closed-form expressions; the only
numerical derivatives anywhere are spline derivatives of 1D boundary
functions.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import ahead as ahead_mod
from . import eos as eos_mod
from .errors import (
    ConfigError,
    ContainmentViolated,
    DegenerateJump,
    DeterminismViolated,
    HorizonExceeded,
    NotConverged,
)
from .grid import BoundaryFn, Cumulative1D, Field2, TriGrid
from .jump import ShockSide, solve_hugoniot
from .origin import InteractionPointData

_MACH_EPS = float(np.finfo(float).eps)
# Safety factor for the roundoff floor of spline second-derivative norms;
# knot noise of size eps*scale is amplified by ~1/h^2.
_PAPER_NORM_GUARD = 1e4


@dataclass(frozen=True)
class IterateSnapshot:
    """One iterate: boundary invariants, x with derivative fields, and the
    reconstructed t (filled by :func:`reconstruct_t`)."""

    n: int
    alpha_plus: BoundaryFn        # behind alpha along the left shock, [0, eps]
    beta_plus: BoundaryFn         # behind beta along the right shock, [0, eps]
    x: Field2
    x_u: Field2
    x_v: Field2
    x_uv: Field2
    x_uu: Field2
    x_vv: Field2
    t: Field2 | None = None
    t_u: Field2 | None = None
    t_v: Field2 | None = None


@dataclass
class ShockTrace:
    """Boundary quantities along one shock, sampled at the v-knots."""

    side: ShockSide
    param: np.ndarray
    t_plus: np.ndarray
    x_plus: np.ndarray
    alpha_plus: np.ndarray
    beta_plus: np.ndarray
    alpha_minus: np.ndarray
    beta_minus: np.ndarray
    V: np.ndarray
    Gamma: np.ndarray
    Gamma_fn: BoundaryFn
    margin_lo: np.ndarray
    margin_hi: np.ndarray
    containment: np.ndarray
    j_residual: np.ndarray
    dt_dparam: np.ndarray
    dx_dparam: np.ndarray


@dataclass
class TracePair:
    left: ShockTrace
    right: ShockTrace
    gamma_left: np.ndarray     # Gamma2(u)/Gamma1(u) at the knots
    gamma_right: np.ndarray    # Gamma2(v)/Gamma1(a v)
    dgamma_left: np.ndarray
    dgamma_right: np.ndarray


@dataclass
class SourceFields:
    mu: Field2
    nu: Field2
    M: Field2
    M_u: Field2
    M_v: Field2
    Lambda_left: BoundaryFn
    Lambda_right: BoundaryFn
    Phi_left: BoundaryFn
    Phi_right: BoundaryFn
    row_integral_M: np.ndarray     # int over full rows of M, per row
    vcurve_M: np.ndarray           # int_u^v M(u, v') dv' at every node


@dataclass
class ConvergenceDiag:
    """Per-iteration deltas of the iterate triple.

    ``records`` holds literal measurements; ratios are raw quotients of
    consecutive combined sup-norm deltas, no smoothing.
    """

    tol_iter: float
    paper_tol: float
    noise_floor: float
    records: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def value_deltas(self):
        return [r["value_delta"] for r in self.records]

    def ratios(self):
        d = self.value_deltas()
        return [d[k] / d[k - 1] if d[k - 1] > 0 else 0.0 for k in range(1, len(d))]

    def clean_ratios(self):
        d = self.value_deltas()
        out = []
        for k in range(1, len(d)):
            if d[k] > self.noise_floor and d[k - 1] > self.noise_floor:
                out.append(d[k] / d[k - 1])
        return out

    def terminal_ratio(self):
        clean = self.clean_ratios()
        return clean[-1] if clean else 0.0

    def spectral_radius_estimate(self):
        clean = self.clean_ratios()
        if not clean:
            return 0.0
        return float(np.median(clean[-3:]))

    def as_dict(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "tol_iter": self.tol_iter,
            "paper_tol": self.paper_tol,
            "noise_floor": self.noise_floor,
            "terminal_ratio": self.terminal_ratio(),
            "spectral_radius_estimate": self.spectral_radius_estimate(),
            "ratios": self.ratios(),
            "records": self.records,
        }


@dataclass
class SchemeConfig:
    eos: object
    left_field: object
    right_field: object
    ipd: InteractionPointData
    grid: TriGrid
    tol_newton: float = 1e-12
    tol_iter: float = 1e-11
    max_iter: int = 200
    initial: IterateSnapshot | None = None
    progress: bool = False


def init_iterate(ipd: InteractionPointData, grid: TriGrid) -> IterateSnapshot:
    """Affine starting iterate pinned to the interaction-point data."""
    g0 = ipd.Gamma0
    vv = np.broadcast_to(grid.v[:, None], grid.u.shape)
    x = Field2(grid, grid.u / g0 + vv)
    zero = Field2.constant(grid, 0.0)
    return IterateSnapshot(
        n=0,
        alpha_plus=BoundaryFn(grid.v, ipd.beta0 + ipd.alpha0p * grid.v),
        beta_plus=BoundaryFn(grid.v, ipd.beta0 + ipd.beta0p * grid.v),
        x=x,
        x_u=Field2.constant(grid, 1.0 / g0),
        x_v=Field2.constant(grid, 1.0),
        x_uv=zero,
        x_uu=Field2.constant(grid, 0.0),
        x_vv=Field2.constant(grid, 0.0),
    )


class _NodeKit:
    """Per-iteration node arrays shared by the assembly steps."""

    def __init__(self, snap: IterateSnapshot, eos, grid: TriGrid):
        self.grid = grid
        self.alpha = snap.alpha_plus(grid.u)
        self.dalpha = snap.alpha_plus(grid.u, 1)
        self.d2alpha = snap.alpha_plus(grid.u, 2)
        beta_rows = snap.beta_plus.values
        dbeta_rows = snap.beta_plus(grid.v, 1)
        d2beta_rows = snap.beta_plus(grid.v, 2)
        shape = grid.u.shape
        self.beta = np.broadcast_to(beta_rows[:, None], shape).copy()
        self.dbeta = np.broadcast_to(dbeta_rows[:, None], shape).copy()
        self.d2beta = np.broadcast_to(d2beta_rows[:, None], shape).copy()
        self.jet = eos_mod.char_jet(eos, self.alpha, self.beta)


def reconstruct_t(snap: IterateSnapshot, eos) -> IterateSnapshot:
    """Rebuild t, t_u, t_v from x via the characteristic relations.

    t integrates phi+psi along the diagonal and psi up the v-curve, so
    t_v = psi holds exactly at the nodes while t_u carries the integral of
    d(psi)/du expanded through the stored mixed derivative of x.
    """
    grid = snap.x.grid
    kit = _NodeKit(snap, eos, grid)
    jet = kit.jet
    phi = snap.x_u.values / jet.c_in
    psi = snap.x_v.values / jet.c_out
    h_u = -jet.co_a * kit.dalpha / (jet.c_out * jet.c_out)
    psi_u = h_u * snap.x_v.values + snap.x_uv.values / jet.c_out

    psi_f = Field2(grid, psi)
    psi_u_f = Field2(grid, psi_u)

    diag_cum = Cumulative1D(grid.v, (phi + psi)[:, -1])
    t_vals = diag_cum(grid.u) + grid.vcurve_all_nodes(psi_f)
    phi_diag = BoundaryFn(grid.v, phi[:, -1])
    t_u_vals = phi_diag(grid.u) + grid.vcurve_all_nodes(psi_u_f)

    return replace(snap, t=Field2(grid, t_vals), t_u=Field2(grid, t_u_vals),
                   t_v=Field2(grid, psi))


def _one_trace(eos, side, grid, t_plus, x_plus, alpha_p, beta_p, fld, bchar, a):
    t_plus = np.where(np.abs(t_plus) < 1e3 * _MACH_EPS, 0.0, t_plus)
    if np.any(t_plus < 0.0):
        raise ContainmentViolated(
            f"{side.name} trace reaches negative time t={float(np.min(t_plus))}"
        )
    if np.any(t_plus > fld.t_max):
        raise ContainmentViolated(
            f"{side.name} trace leaves the development horizon "
            f"(t={float(np.max(t_plus))} > t_max={fld.t_max}); reduce epsilon "
            "or extend the ahead field"
        )
    margin = np.asarray(ahead_mod.contains(fld, bchar, t_plus, x_plus), dtype=float)
    if np.any(margin < 0.0):
        k = int(np.argmin(margin))
        raise ContainmentViolated(
            f"{side.name} trace leaves the future development: margin "
            f"{float(margin[k])} at parameter {float(grid.v[k])}; reduce epsilon"
        )
    alpha_m, beta_m = fld.eval(t_plus, x_plus)
    rho_p, w_p, eta_p = eos_mod.invariants_arrays(eos, alpha_p, beta_p)
    rho_m, w_m, eta_m = eos_mod.invariants_arrays(eos, alpha_m, beta_m)
    j_rho = rho_p - rho_m
    if np.any(np.abs(j_rho) < 1e-12 * np.maximum(rho_p, rho_m)):
        raise DegenerateJump(f"density jump vanished along the {side.name} trace")
    v_shock = (rho_p * w_p - rho_m * w_m) / j_rho
    p_p = eos.pressure(rho_p)
    p_m = eos.pressure(rho_m)
    j_mom = rho_p * w_p - rho_m * w_m
    j_flux = (rho_p * w_p**2 + p_p) - (rho_m * w_m**2 + p_m)
    j_res = j_mom * j_mom - j_flux * j_rho

    c_in_p, c_out_p = w_p - eta_p, w_p + eta_p
    if side is ShockSide.LEFT:
        margin_lo = v_shock - c_in_p
        margin_hi = (w_m - eta_m) - v_shock
        gamma = (c_out_p / c_in_p) * (v_shock - c_in_p) / (c_out_p - v_shock)
    else:
        margin_lo = v_shock - (w_m + eta_m)
        margin_hi = c_out_p - v_shock
        gamma = a * (c_out_p / c_in_p) * (v_shock - c_in_p) / (c_out_p - v_shock)
    if np.any(margin_lo <= 0.0) or np.any(margin_hi <= 0.0):
        worst = float(min(np.min(margin_lo), np.min(margin_hi)))
        raise DeterminismViolated(
            f"determinism margin {worst} on the {side.name} trace"
        )
    return ShockTrace(
        side=side, param=grid.v.copy(), t_plus=t_plus, x_plus=x_plus,
        alpha_plus=np.asarray(alpha_p, dtype=float),
        beta_plus=np.asarray(beta_p, dtype=float),
        alpha_minus=np.asarray(alpha_m, dtype=float),
        beta_minus=np.asarray(beta_m, dtype=float),
        V=v_shock, Gamma=gamma, Gamma_fn=BoundaryFn(grid.v, gamma),
        margin_lo=margin_lo, margin_hi=margin_hi, containment=margin,
        j_residual=j_res, dt_dparam=np.zeros_like(v_shock),
        dx_dparam=np.zeros_like(v_shock),
    )


def trace_shocks(snap: IterateSnapshot, left_field, right_field,
                 ipd: InteractionPointData, bchars=None) -> TracePair:
    """Evaluate both shock traces of the current iterate.

    The left trace runs along sigma=1 (u = v), the right along sigma=0
    (u = a v); with the shared v-knots both are exact node columns.  Raises
    if a trace leaves its development, the density jump degenerates, or a
    determinism margin closes.
    """
    if snap.t is None:
        raise ValueError("reconstruct_t must run before trace_shocks")
    grid = snap.x.grid
    a = ipd.a
    if bchars is None:
        bchars = (ahead_mod.boundary_characteristic(left_field),
                  ahead_mod.boundary_characteristic(right_field))

    left = _one_trace(
        eos=left_field.eos, side=ShockSide.LEFT, grid=grid,
        t_plus=snap.t.values[:, -1].copy(), x_plus=snap.x.values[:, -1].copy(),
        alpha_p=snap.alpha_plus.values.copy(), beta_p=snap.beta_plus.values.copy(),
        fld=left_field, bchar=bchars[0], a=a)
    right = _one_trace(
        eos=right_field.eos, side=ShockSide.RIGHT, grid=grid,
        t_plus=snap.t.values[:, 0].copy(), x_plus=snap.x.values[:, 0].copy(),
        alpha_p=np.asarray(snap.alpha_plus(a * grid.v), dtype=float),
        beta_p=snap.beta_plus.values.copy(),
        fld=right_field, bchar=bchars[1], a=a)

    left.dt_dparam = snap.t_u.values[:, -1] + snap.t_v.values[:, -1]
    left.dx_dparam = snap.x_u.values[:, -1] + snap.x_v.values[:, -1]
    right.dt_dparam = a * snap.t_u.values[:, 0] + snap.t_v.values[:, 0]
    right.dx_dparam = a * snap.x_u.values[:, 0] + snap.x_v.values[:, 0]

    gamma_left = right.Gamma / left.Gamma
    gamma_right = right.Gamma / left.Gamma_fn(a * grid.v)
    dgamma_left = BoundaryFn(grid.v, gamma_left)(grid.v, 1)
    dgamma_right = BoundaryFn(grid.v, gamma_right)(grid.v, 1)
    return TracePair(left=left, right=right,
                     gamma_left=gamma_left, gamma_right=gamma_right,
                     dgamma_left=dgamma_left, dgamma_right=dgamma_right)


def assemble_sources(snap: IterateSnapshot, traces: TracePair, eos,
                     ipd: InteractionPointData) -> SourceFields:
    """Interior source M = mu*x_u + nu*x_v with analytic partials, and the
    boundary sources Lambda/Phi of both shocks."""
    grid = snap.x.grid
    a = ipd.a
    kit = _NodeKit(snap, eos, grid)
    jet = kit.jet
    ci, co = jet.c_in, jet.c_out
    gap = co - ci

    dnm1 = gap * ci
    p_coef = co * jet.ci_b / dnm1
    dnm1_a = (jet.co_a - jet.ci_a) * ci + gap * jet.ci_a
    dnm1_b = (jet.co_b - jet.ci_b) * ci + gap * jet.ci_b
    p_a = (jet.co_a * jet.ci_b + co * jet.ci_ab) / dnm1 \
        - co * jet.ci_b * dnm1_a / dnm1**2
    p_b = (jet.co_b * jet.ci_b + co * jet.ci_bb) / dnm1 \
        - co * jet.ci_b * dnm1_b / dnm1**2

    dnm2 = gap * co
    s_coef = ci * jet.co_a / dnm2
    dnm2_a = (jet.co_a - jet.ci_a) * co + gap * jet.co_a
    dnm2_b = (jet.co_b - jet.ci_b) * co + gap * jet.co_b
    s_a = (jet.ci_a * jet.co_a + ci * jet.co_aa) / dnm2 \
        - ci * jet.co_a * dnm2_a / dnm2**2
    s_b = (jet.ci_b * jet.co_a + ci * jet.co_ab) / dnm2 \
        - ci * jet.co_a * dnm2_b / dnm2**2

    mu = p_coef * kit.dbeta
    nu = -s_coef * kit.dalpha
    m_vals = mu * snap.x_u.values + nu * snap.x_v.values

    mu_u = p_a * kit.dalpha * kit.dbeta
    mu_v = p_b * kit.dbeta**2 + p_coef * kit.d2beta
    nu_u = -s_a * kit.dalpha**2 - s_coef * kit.d2alpha
    nu_v = -s_b * kit.dbeta * kit.dalpha
    m_u_vals = mu_u * snap.x_u.values + mu * snap.x_uu.values \
        + nu_u * snap.x_v.values + nu * snap.x_uv.values
    m_v_vals = mu_v * snap.x_u.values + mu * snap.x_uv.values \
        + nu_v * snap.x_v.values + nu * snap.x_vv.values

    m_f = Field2(grid, m_vals)
    row_int_m = grid.full_row_integral(m_vals)
    vcurve_m = grid.vcurve_all_nodes(m_f)

    # Lambda along the left shock: all three evaluation points (a*u, u) are
    # sigma=0 node columns at the shared knots.
    lam_left = traces.dgamma_left * snap.x_u.values[:, 0] \
        + traces.gamma_left * a * snap.x_uu.values[:, 0] \
        + traces.gamma_left * m_vals[:, 0]
    # Lambda along the right shock needs the sigma=1 line at v-position a*v.
    xv_diag = BoundaryFn(grid.v, snap.x_v.values[:, -1])
    xvv_diag = BoundaryFn(grid.v, snap.x_vv.values[:, -1])
    m_diag = BoundaryFn(grid.v, m_vals[:, -1])
    av = a * grid.v
    lam_right = traces.dgamma_right * xv_diag(av) \
        + traces.gamma_right * a * xvv_diag(av) \
        + traces.gamma_right * a * m_diag(av)

    phi_left = Cumulative1D(grid.v, lam_left)(grid.v) \
        + row_int_m / traces.left.Gamma
    phi_right = Cumulative1D(grid.v, lam_right)(grid.v) \
        + traces.right.Gamma * vcurve_m[:, 0]

    return SourceFields(
        mu=Field2(grid, mu), nu=Field2(grid, nu), M=m_f,
        M_u=Field2(grid, m_u_vals), M_v=Field2(grid, m_v_vals),
        Lambda_left=BoundaryFn(grid.v, lam_left),
        Lambda_right=BoundaryFn(grid.v, lam_right),
        Phi_left=BoundaryFn(grid.v, phi_left),
        Phi_right=BoundaryFn(grid.v, phi_right),
        row_integral_M=row_int_m, vcurve_M=vcurve_m,
    )


def update_x(snap: IterateSnapshot, sources: SourceFields, traces: TracePair,
             ipd: InteractionPointData):
    """New x from the double-integral representation, with all five
    derivative fields evaluated from their own closed-form expressions."""
    grid = snap.x.grid
    a, g0 = ipd.a, ipd.Gamma0
    m_vals = sources.M.values
    u = grid.u
    vv = np.broadcast_to(grid.v[:, None], u.shape)

    cum_rows_m = grid.row_cumulative(m_vals)
    cum_rows_mv = grid.row_cumulative(sources.M_v.values)
    row_int_mv = cum_rows_mv[:, -1]
    d2_c = grid.vcurve_all_nodes(Field2(grid, cum_rows_m))
    d2_mu = grid.vcurve_all_nodes(sources.M_u)

    x_vals = u / g0 + vv \
        + Cumulative1D(grid.v, sources.Phi_left.values)(u) \
        + Cumulative1D(grid.v, sources.Phi_right.values)(grid.v)[:, None] \
        + Cumulative1D(grid.v, sources.row_integral_M)(u) \
        + d2_c
    x_u_vals = 1.0 / g0 + sources.Phi_left(u) + sources.vcurve_M
    x_v_vals = 1.0 + sources.Phi_right.values[:, None] + cum_rows_m
    x_uv_vals = m_vals.copy()

    gam_l = traces.left.Gamma_fn
    row_m_fn = BoundaryFn(grid.v, sources.row_integral_M)
    row_mv_fn = BoundaryFn(grid.v, row_int_mv)
    m_diag_fn = BoundaryFn(grid.v, m_vals[:, -1])
    m_edge_fn = BoundaryFn(grid.v, m_vals[:, 0])
    gl_u = gam_l(u)
    x_uu_vals = sources.Lambda_left(u) \
        - gam_l(u, 1) / gl_u**2 * row_m_fn(u) \
        + (m_diag_fn(u) - a * m_edge_fn(u) + row_mv_fn(u)) / gl_u \
        - m_vals + d2_mu

    gam_r = traces.right.Gamma
    dgam_r = traces.right.Gamma_fn(grid.v, 1)
    x_vv_cols = sources.Lambda_right.values \
        + dgam_r * sources.vcurve_M[:, 0] \
        + gam_r * (m_vals[:, 0] - a * m_diag_fn(a * grid.v) + a * d2_mu[:, 0]) \
        - a * m_vals[:, 0]
    x_vv_vals = x_vv_cols[:, None] + cum_rows_mv

    return {
        "x": Field2(grid, x_vals), "x_u": Field2(grid, x_u_vals),
        "x_v": Field2(grid, x_v_vals), "x_uv": Field2(grid, x_uv_vals),
        "x_uu": Field2(grid, x_uu_vals), "x_vv": Field2(grid, x_vv_vals),
    }


def update_invariants(traces: TracePair, eos, ipd: InteractionPointData,
                      tol_newton=1e-12):
    """New behind invariants through the Hugoniot maps, node by node, seeded
    by the previous trace values; knot 0 is pinned to the origin value."""
    from .eos import RiemannPair

    left, right = traces.left, traces.right
    n = len(left.param)
    alpha_new = np.empty(n)
    beta_new = np.empty(n)
    for k in range(n):
        alpha_new[k] = solve_hugoniot(
            eos, ShockSide.LEFT, float(left.beta_plus[k]),
            RiemannPair(float(left.alpha_minus[k]), float(left.beta_minus[k])),
            seed=float(left.alpha_plus[k]), tol=tol_newton)
        beta_new[k] = solve_hugoniot(
            eos, ShockSide.RIGHT, float(right.alpha_plus[k]),
            RiemannPair(float(right.alpha_minus[k]), float(right.beta_minus[k])),
            seed=float(right.beta_plus[k]), tol=tol_newton)
    alpha_new[0] = ipd.beta0
    beta_new[0] = ipd.beta0
    knots = left.param
    return BoundaryFn(knots, alpha_new), BoundaryFn(knots, beta_new)


def _validate_initial(snap: IterateSnapshot, ipd: InteractionPointData):
    grid = snap.x.grid
    g0 = ipd.Gamma0
    checks = [
        (abs(snap.x.values[0, 0]), 1e-10, "x(0,0)"),
        (abs(snap.x_u.values[0, 0] - 1.0 / g0), 1e-10 * abs(1 / g0), "x_u(0,0)"),
        (abs(snap.x_v.values[0, 0] - 1.0), 1e-10, "x_v(0,0)"),
        (abs(snap.alpha_plus.values[0] - ipd.beta0), 1e-10, "alpha_plus(0)"),
        (abs(snap.beta_plus.values[0] - ipd.beta0), 1e-10, "beta_plus(0)"),
        (abs(float(snap.alpha_plus(0.0, 1)) - ipd.alpha0p), 1e-6, "alpha_plus'(0)"),
        (abs(float(snap.beta_plus(0.0, 1)) - ipd.beta0p), 1e-6, "beta_plus'(0)"),
    ]
    for err, tol, name in checks:
        if err > max(tol, 1e-12):
            raise ConfigError(
                f"initial iterate breaks the origin pin {name} (error {err})"
            )
    if snap.alpha_plus.knots.shape != grid.v.shape or \
       not np.allclose(snap.alpha_plus.knots, grid.v):
        raise ConfigError("initial iterate knots do not match the grid rows")


def _paper_norm_x(old: IterateSnapshot, new_fields) -> float:
    return max(
        float(np.max(np.abs(new_fields["x_uu"].values - old.x_uu.values))),
        float(np.max(np.abs(new_fields["x_uv"].values - old.x_uv.values))),
        float(np.max(np.abs(new_fields["x_vv"].values - old.x_vv.values))),
    )


def run_iteration(config: SchemeConfig):
    """Iterate the scheme to its fixed point.

    Stops when the plain sup-norm deltas of (x, alpha_plus, beta_plus) fall
    below tol_iter and the second-derivative (ball-norm) deltas fall below
    max(tol_iter, roundoff guard); the guard accounts for the 1/h^2
    amplification of knot roundoff in spline second derivatives.

    Returns (snapshot, diag); raises NotConverged (diag attached) at
    max_iter.
    """
    eos, ipd, grid = config.eos, config.ipd, config.grid
    bchars = (ahead_mod.boundary_characteristic(config.left_field),
              ahead_mod.boundary_characteristic(config.right_field))
    if config.initial is not None:
        _validate_initial(config.initial, ipd)
        snap = replace(config.initial, n=0)
    else:
        snap = init_iterate(ipd, grid)

    scale = max(1.0, abs(ipd.beta0))
    h = grid.epsilon / grid.N
    noise_floor = 1e3 * _MACH_EPS * scale
    paper_tol = max(config.tol_iter, _PAPER_NORM_GUARD * _MACH_EPS * scale / h**2)
    diag = ConvergenceDiag(tol_iter=config.tol_iter, paper_tol=paper_tol,
                           noise_floor=noise_floor)

    knots = grid.v
    for n in range(config.max_iter):
        snap = reconstruct_t(snap, eos)
        traces = trace_shocks(snap, config.left_field, config.right_field,
                              ipd, bchars)
        sources = assemble_sources(snap, traces, eos, ipd)
        new_x = update_x(snap, sources, traces, ipd)
        alpha_new, beta_new = update_invariants(traces, eos, ipd,
                                                config.tol_newton)

        d_alpha = float(np.max(np.abs(alpha_new.values - snap.alpha_plus.values)))
        d_beta = float(np.max(np.abs(beta_new.values - snap.beta_plus.values)))
        d_x = float(np.max(np.abs(new_x["x"].values - snap.x.values)))
        n1 = float(np.max(np.abs(alpha_new(knots, 2) - snap.alpha_plus(knots, 2))))
        n2 = float(np.max(np.abs(beta_new(knots, 2) - snap.beta_plus(knots, 2))))
        n0 = _paper_norm_x(snap, new_x)
        value_delta = max(d_x, d_alpha, d_beta)
        paper_delta = max(n0, n1, n2)
        diag.records.append({
            "n": n + 1,
            "sup_dx": d_x, "sup_dalpha": d_alpha, "sup_dbeta": d_beta,
            "norm0_dx": n0, "norm1_dalpha": n1, "norm2_dbeta": n2,
            "value_delta": value_delta, "paper_delta": paper_delta,
            "det_margin_left": float(np.min(np.minimum(
                traces.left.margin_lo, traces.left.margin_hi))),
            "det_margin_right": float(np.min(np.minimum(
                traces.right.margin_lo, traces.right.margin_hi))),
            "containment_left": float(np.min(traces.left.containment)),
            "containment_right": float(np.min(traces.right.containment)),
        })
        if config.progress:
            print(
                f"iter {n + 1:3d}  |dx|={d_x:.3e} |da|={d_alpha:.3e} "
                f"|db|={d_beta:.3e}  ratio={diag.ratios()[-1] if len(diag.records) > 1 else float('nan'):.3f}",
                file=sys.stderr)

        snap = IterateSnapshot(
            n=n + 1, alpha_plus=alpha_new, beta_plus=beta_new,
            x=new_x["x"], x_u=new_x["x_u"], x_v=new_x["x_v"],
            x_uv=new_x["x_uv"], x_uu=new_x["x_uu"], x_vv=new_x["x_vv"])

        if value_delta <= config.tol_iter and paper_delta <= paper_tol:
            diag.converged = True
            diag.iterations = n + 1
            snap = reconstruct_t(snap, eos)
            return snap, diag

    diag.iterations = config.max_iter
    err = NotConverged(
        f"no convergence after {config.max_iter} iterations; last deltas "
        f"{diag.records[-1]['value_delta']:.3e} (values) / "
        f"{diag.records[-1]['paper_delta']:.3e} (second derivatives); "
        "consider reducing epsilon"
    )
    err.diag = diag
    raise err

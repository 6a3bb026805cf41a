"""Post-hoc certification of a converged solution.

Every equation of the problem statement is re-evaluated on a shifted probe
lattice (cell centers rather than the solution's own nodes): characteristic
relations, the mixed-derivative integrability condition, the jump conditions
along both shocks, the boundary identities coupling x_u and x_v through the
Gamma coefficients, determinism and containment margins, and the coordinate
Jacobian.  An asymptotic fit against the interaction-point expansion and a
perturbed-seed uniqueness rerun complete the suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import eos as eos_mod
from . import scheme as scheme_mod
from .errors import UniquenessCheckFailed
from .grid import BoundaryFn, Field2
from .jump import JumpPair, ShockSide, hugoniot_residual, residual_scale
from .eos import RiemannPair


@dataclass
class ResidualReport:
    char_out_sup: float
    char_out_l2: float
    char_in_sup: float
    char_in_l2: float
    integrability_sup: float
    integrability_l2: float
    b_left_sup: float
    b_left_l2: float
    b_right_sup: float
    b_right_l2: float
    rh_left_sup: float
    rh_right_sup: float
    det_margin_min_left: float
    det_margin_min_right: float
    containment_min_left: float
    containment_min_right: float
    jacobian_min: float
    jacobian_max: float
    jacobian_origin: float
    jacobian_origin_expected: float
    asymptotic: dict = field(default_factory=dict)

    def as_dict(self):
        out = dict(self.__dict__)
        out["asymptotic"] = dict(self.asymptotic)
        return out


def _weighted_norms(res, weights):
    res = np.abs(np.asarray(res, dtype=float))
    w = np.asarray(weights, dtype=float)
    sup = float(np.max(res)) if res.size else 0.0
    l2 = float(np.sqrt(np.sum(w * res * res) / np.sum(w))) if res.size else 0.0
    return sup, l2


def residual_suite(solution, eos, left_field, right_field, ipd, grid) -> ResidualReport:
    """Evaluate all residual families for a converged snapshot."""
    if solution.t is None:
        solution = scheme_mod.reconstruct_t(solution, eos)
    traces = scheme_mod.trace_shocks(solution, left_field, right_field, ipd)

    # probe lattice: cell centers in collapsed coordinates
    sig_c = 0.5 * (grid.sigma[1:] + grid.sigma[:-1])
    v_c = 0.5 * (grid.v[1:] + grid.v[:-1])
    sig_p, v_p = np.meshgrid(sig_c, v_c, indexing="xy")
    sig_p, v_p = sig_p.ravel(), v_p.ravel()
    u_p = v_p * (grid.a + (1.0 - grid.a) * sig_p)
    area_w = v_p + 0.25 * grid.v[-1] / grid.N  # trapezoid cell area ~ v * dsig * dv

    alpha_p = solution.alpha_plus(u_p)
    beta_p = solution.beta_plus(v_p)
    jet = eos_mod.char_jet(eos, alpha_p, beta_p)

    def at(fld):
        return fld.eval_collapsed(sig_p, v_p)

    x_u, x_v = at(solution.x_u), at(solution.x_v)
    t_u, t_v = at(solution.t_u), at(solution.t_v)
    r_out = x_v - jet.c_out * t_v
    r_in = x_u - jet.c_in * t_u
    char_out_sup, char_out_l2 = _weighted_norms(r_out, area_w)
    char_in_sup, char_in_l2 = _weighted_norms(r_in, area_w)

    # mixed-derivative integrability: d(psi)/du - d(phi)/dv by central
    # differences of the interpolated psi/phi fields, interior probes only
    kit_alpha = solution.alpha_plus(grid.u)
    kit_beta = np.broadcast_to(solution.beta_plus.values[:, None], grid.u.shape)
    jet_n = eos_mod.char_jet(eos, kit_alpha, kit_beta)
    psi_f = Field2(grid, solution.x_v.values / jet_n.c_out)
    phi_f = Field2(grid, solution.x_u.values / jet_n.c_in)
    dv = grid.v[-1] / grid.N
    delta_v = 0.25 * dv
    keep = (sig_p > 0.15) & (sig_p < 0.85) & (v_p >= 2.0 * dv) \
        & (u_p >= grid.a * (v_p + delta_v)) & (u_p <= v_p - delta_v)
    us, vs = u_p[keep], v_p[keep]
    delta_u = 0.25 * (1.0 - grid.a) * vs / grid.Nsig
    dpsi_du = (psi_f.eval(us + delta_u, vs) - psi_f.eval(us - delta_u, vs)) \
        / (2.0 * delta_u)
    dphi_dv = (phi_f.eval(us, vs + delta_v) - phi_f.eval(us, vs - delta_v)) \
        / (2.0 * delta_v)
    integ_sup, integ_l2 = _weighted_norms(dpsi_du - dphi_dv, area_w[keep])

    # boundary identities at knot midpoints
    vm = v_c
    xu_diag = BoundaryFn(grid.v, solution.x_u.values[:, -1])
    xv_diag = BoundaryFn(grid.v, solution.x_v.values[:, -1])
    xu_edge = BoundaryFn(grid.v, solution.x_u.values[:, 0])
    xv_edge = BoundaryFn(grid.v, solution.x_v.values[:, 0])
    b1 = xv_diag(vm) - xu_diag(vm) * traces.left.Gamma_fn(vm)
    b2 = xv_edge(vm) - xu_edge(vm) * traces.right.Gamma_fn(vm)
    wm = np.ones_like(vm)
    b1_sup, b1_l2 = _weighted_norms(b1, wm)
    b2_sup, b2_l2 = _weighted_norms(b2, wm)

    # jump conditions at trace midpoints, re-evaluated from scratch
    def rh_sup(trace):
        a_pl = BoundaryFn(grid.v, trace.alpha_plus)(vm)
        b_pl = BoundaryFn(grid.v, trace.beta_plus)(vm)
        a_mn = BoundaryFn(grid.v, trace.alpha_minus)(vm)
        b_mn = BoundaryFn(grid.v, trace.beta_minus)(vm)
        worst = 0.0
        for k in range(len(vm)):
            jp = JumpPair(behind=RiemannPair(float(a_pl[k]), float(b_pl[k])),
                          ahead=RiemannPair(float(a_mn[k]), float(b_mn[k])))
            worst = max(worst, abs(hugoniot_residual(eos, jp))
                        / residual_scale(eos, jp))
        return worst

    jac = 2.0 * jet.eta * t_u * t_v
    jac_origin = float(2.0 * ipd.eta0 * solution.t_u.values[0, 0]
                       * solution.t_v.values[0, 0])
    return ResidualReport(
        char_out_sup=char_out_sup, char_out_l2=char_out_l2,
        char_in_sup=char_in_sup, char_in_l2=char_in_l2,
        integrability_sup=integ_sup, integrability_l2=integ_l2,
        b_left_sup=b1_sup, b_left_l2=b1_l2,
        b_right_sup=b2_sup, b_right_l2=b2_l2,
        rh_left_sup=rh_sup(traces.left), rh_right_sup=rh_sup(traces.right),
        det_margin_min_left=float(np.min(np.minimum(
            traces.left.margin_lo, traces.left.margin_hi))),
        det_margin_min_right=float(np.min(np.minimum(
            traces.right.margin_lo, traces.right.margin_hi))),
        containment_min_left=float(np.min(traces.left.containment)),
        containment_min_right=float(np.min(traces.right.containment)),
        jacobian_min=float(np.min(jac)), jacobian_max=float(np.max(jac)),
        jacobian_origin=jac_origin,
        jacobian_origin_expected=float(-2.0 / (ipd.eta0 * ipd.Gamma0)),
        asymptotic=asymptotic_check(solution, ipd),
    )


def _r_squared(residual, model_cols):
    """R^2 of a least-squares fit of residual on the given columns."""
    a = np.column_stack(model_cols)
    coef, *_ = np.linalg.lstsq(a, residual, rcond=None)
    fitted = a @ coef
    ss_res = float(np.sum((residual - fitted) ** 2))
    ss_tot = float(np.sum((residual - np.mean(residual)) ** 2))
    if ss_tot < 1e-28:
        return 1.0
    return 1.0 - ss_res / ss_tot


def asymptotic_check(solution, ipd) -> dict:
    """Fit the leading interaction-point expansion on the inner quarter of
    the domain and report coefficient deviations and the quadratic
    remainder."""
    grid = solution.x.grid
    n_in = max(4, grid.N // 4)
    rows = slice(0, n_in + 1)
    v_in = grid.v[rows]
    u_in = grid.u[rows]
    vv_in = np.broadcast_to(v_in[:, None], u_in.shape)

    # boundary invariants: linear fits in their own parameter
    knots = grid.v[rows]
    alpha_vals = solution.alpha_plus.values[rows]
    beta_vals = solution.beta_plus.values[rows]
    a_design = np.column_stack([np.ones_like(knots), knots])
    ca, *_ = np.linalg.lstsq(a_design, alpha_vals, rcond=None)
    cb, *_ = np.linalg.lstsq(a_design, beta_vals, rcond=None)

    x_vals = solution.x.values[rows]
    t_vals = solution.t.values[rows]
    design = np.column_stack([np.ones(u_in.size), u_in.ravel(), vv_in.ravel()])
    cx, *_ = np.linalg.lstsq(design, x_vals.ravel(), rcond=None)
    ct, *_ = np.linalg.lstsq(design, t_vals.ravel(), rcond=None)

    g0, eta0 = ipd.Gamma0, ipd.eta0
    rem_alpha = alpha_vals - (ipd.beta0 + ipd.alpha0p * knots)
    rem_beta = beta_vals - (ipd.beta0 + ipd.beta0p * knots)
    rem_x = x_vals - (u_in / g0 + vv_in)
    rem_t = t_vals - (vv_in - u_in / g0) / eta0

    uu, vv = u_in.ravel(), vv_in.ravel()
    quad_cols = [uu * uu, uu * vv, vv * vv]
    return {
        "alpha_fit": [float(c) for c in ca],
        "beta_fit": [float(c) for c in cb],
        "x_fit": [float(c) for c in cx],
        "t_fit": [float(c) for c in ct],
        "alpha_dev": [float(ca[0] - ipd.beta0), float(ca[1] - ipd.alpha0p)],
        "beta_dev": [float(cb[0] - ipd.beta0), float(cb[1] - ipd.beta0p)],
        "x_dev": [float(cx[0]), float(cx[1] - 1.0 / g0), float(cx[2] - 1.0)],
        "t_dev": [float(ct[0]), float(ct[1] + 1.0 / (eta0 * g0)),
                  float(ct[2] - 1.0 / eta0)],
        "remainder_sup": {
            "alpha": float(np.max(np.abs(rem_alpha))),
            "beta": float(np.max(np.abs(rem_beta))),
            "x": float(np.max(np.abs(rem_x))),
            "t": float(np.max(np.abs(rem_t))),
        },
        "quadratic_r2": {
            "x": _r_squared(rem_x.ravel(), quad_cols),
            "t": _r_squared(rem_t.ravel(), quad_cols),
        },
    }


def uniqueness_restart(config: scheme_mod.SchemeConfig, baseline=None,
                       bump_coeff=None) -> dict:
    """Rerun the iteration from a perturbed admissible initial iterate and
    compare against the baseline fixed point.

    The perturbation adds bump_coeff*u^2 (default 10*tol_iter, keeping the
    pinned origin value and first derivative) to the starting left-shock
    invariant.  Final solutions must agree within 10*tol_iter.
    """
    if baseline is None:
        baseline, _ = scheme_mod.run_iteration(config)
    if bump_coeff is None:
        bump_coeff = 10.0 * config.tol_iter
    start = scheme_mod.init_iterate(config.ipd, config.grid)
    bumped = BoundaryFn(start.alpha_plus.knots,
                        start.alpha_plus.values
                        + bump_coeff * start.alpha_plus.knots ** 2)
    perturbed0 = replace(start, alpha_plus=bumped)
    cfg = replace(config, initial=perturbed0)
    perturbed, diag = scheme_mod.run_iteration(cfg)

    d_x = float(np.max(np.abs(perturbed.x.values - baseline.x.values)))
    d_alpha = float(np.max(np.abs(perturbed.alpha_plus.values
                                  - baseline.alpha_plus.values)))
    d_beta = float(np.max(np.abs(perturbed.beta_plus.values
                                 - baseline.beta_plus.values)))
    distance = max(d_x, d_alpha, d_beta)
    threshold = 10.0 * config.tol_iter
    report = {
        "bump_coeff": bump_coeff,
        "distance": distance,
        "distance_x": d_x, "distance_alpha": d_alpha, "distance_beta": d_beta,
        "threshold": threshold,
        "iterations": diag.iterations,
        "ok": distance <= threshold,
    }
    if not report["ok"]:
        raise UniquenessCheckFailed(
            f"perturbed-seed rerun landed {distance} from the baseline "
            f"(threshold {threshold})"
        )
    return report

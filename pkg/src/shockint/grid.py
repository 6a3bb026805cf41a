"""Discretization of the triangular characteristic-coordinate domain
T_eps = {0 <= u <= v <= u/a <= eps} in collapsed coordinates.

Rows of constant v are parametrized by sigma in [0, 1] through
u = v*(a + (1-a)*sigma), so the right shock u = a*v is the grid line
sigma = 0 and the left shock u = v is sigma = 1.  Every u-integral of the
update formulas runs over a full or partial sigma-row; integrals along
v-curves at fixed u cross rows and use per-row interpolation.  Quadrature is
composite trapezoid (order 2); interpolation is tensor bicubic (order 4 in
the interior, at least order 2 near boundaries).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .errors import BadResolution, LeavesDomain, OutOfRow, OutsideDomain

MIN_RESOLUTION = 4


class TriGrid:
    def __init__(self, epsilon, a, N, Nsig):
        if not epsilon > 0.0:
            raise BadResolution(f"epsilon={epsilon} must be > 0")
        if not 0.0 < a < 1.0:
            raise BadResolution(f"a={a} must lie in (0, 1)")
        if N < MIN_RESOLUTION or Nsig < MIN_RESOLUTION:
            raise BadResolution(
                f"N={N}, Nsig={Nsig}: at least {MIN_RESOLUTION} intervals "
                "per direction are required"
            )
        self.epsilon = float(epsilon)
        self.a = float(a)
        self.N = int(N)
        self.Nsig = int(Nsig)
        self.sigma = np.arange(Nsig + 1) / Nsig
        self.v = np.arange(N + 1) * (epsilon / N)
        self.u = self.v[:, None] * (a + (1.0 - a) * self.sigma[None, :])
        self.left_knots = np.arange(N + 1) * (a * epsilon / N)
        self._tol = 1e-12 * max(1.0, epsilon)
        self._vq = None

    # -- geometry ----------------------------------------------------------

    def sigma_of(self, u, v):
        """Collapsed coordinate of a physical point; rows collapse at v=0."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (np.where(v > 0.0, u / np.where(v == 0.0, 1.0, v), self.a) - self.a) \
                / (1.0 - self.a)
        return np.clip(s, 0.0, 1.0)

    def check_inside(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        bad = (v < -self._tol) | (v > self.epsilon + self._tol) \
            | (u < self.a * v - self._tol) | (u > v + self._tol)
        if np.any(bad):
            k = np.argwhere(np.atleast_1d(bad))[0]
            uu = np.atleast_1d(u)[tuple(k)] if u.shape else float(u)
            vv = np.atleast_1d(v)[tuple(k)] if v.shape else float(v)
            raise OutsideDomain(f"(u={uu}, v={vv}) outside the domain")

    # -- v-curve quadrature geometry (precomputed once) ---------------------

    def _vcurve_geometry(self):
        if self._vq is not None:
            return self._vq
        hv = self.epsilon / self.N
        sig, vs, wts, node = [], [], [], []
        for j in range(self.N + 1):
            vj = self.v[j]
            for i in range(self.Nsig + 1):
                u = self.u[j, i]
                if vj - u <= self._tol:
                    continue
                k0 = int(np.floor(u / hv)) + 1
                while k0 * hv <= u + self._tol:
                    k0 += 1
                knots = [u] + [k * hv for k in range(k0, j)] + [vj]
                kn = np.asarray(knots)
                w = np.empty_like(kn)
                w[0] = 0.5 * (kn[1] - kn[0])
                w[-1] = 0.5 * (kn[-1] - kn[-2])
                if len(kn) > 2:
                    w[1:-1] = 0.5 * (kn[2:] - kn[:-2])
                s = self.sigma_of(np.full_like(kn, u), kn)
                sig.append(s)
                vs.append(kn)
                wts.append(w)
                node.append(np.full(len(kn), j * (self.Nsig + 1) + i, dtype=np.int64))
        self._vq = (np.concatenate(sig), np.concatenate(vs),
                    np.concatenate(wts), np.concatenate(node))
        return self._vq

    def vcurve_all_nodes(self, f: "Field2") -> np.ndarray:
        """Per-node integrals int_u^v f(u, v') dv' along upward v-curves."""
        sig, vs, wts, node = self._vcurve_geometry()
        vals = f.eval_collapsed(sig, vs)
        out = np.zeros((self.N + 1) * (self.Nsig + 1))
        np.add.at(out, node, vals * wts)
        return out.reshape(self.N + 1, self.Nsig + 1)

    # -- row-wise trapezoid machinery ---------------------------------------

    def row_cumulative(self, values: np.ndarray) -> np.ndarray:
        """Cumulative trapezoid along each row from the right shock (sigma=0):
        C[j, i] = int_{a v_j}^{u_{ji}} f(u', v_j) du'."""
        du = self.v * (1.0 - self.a) / self.Nsig
        c = np.zeros_like(values)
        c[:, 1:] = np.cumsum(0.5 * (values[:, 1:] + values[:, :-1]), axis=1) \
            * du[:, None]
        return c

    def full_row_integral(self, values: np.ndarray) -> np.ndarray:
        return self.row_cumulative(values)[:, -1]


@dataclass
class Cumulative1D:
    """Running trapezoid integral of samples on a 1D knot grid, evaluable at
    arbitrary points (partial end panel uses the linear interpolant)."""

    knots: np.ndarray
    values: np.ndarray
    _cum: np.ndarray = field(init=False)

    def __post_init__(self):
        self.knots = np.asarray(self.knots, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        c = np.zeros_like(self.values)
        c[1:] = np.cumsum(0.5 * (self.values[1:] + self.values[:-1])
                          * np.diff(self.knots))
        self._cum = c

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        idx = np.clip(np.searchsorted(self.knots, s, side="right") - 1,
                      0, len(self.knots) - 2)
        k0 = self.knots[idx]
        dk = self.knots[idx + 1] - k0
        frac = np.clip((s - k0) / dk, 0.0, 1.0)
        g0 = self.values[idx]
        g1 = g0 + frac * (self.values[idx + 1] - g0)
        return self._cum[idx] + 0.5 * (g0 + g1) * frac * dk


class BoundaryFn:
    """Cubic-spline representation of a 1D boundary function with analytic
    first and second spline derivatives."""

    def __init__(self, knots, values):
        self.knots = np.asarray(knots, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = CubicSpline(self.knots, self.values)
        self._tol = 1e-12 * max(1.0, float(self.knots[-1]))

    @property
    def domain(self):
        return float(self.knots[0]), float(self.knots[-1])

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.knots[0] - self._tol) or \
           np.any(x > self.knots[-1] + self._tol):
            raise OutsideDomain(
                f"query outside [{self.knots[0]}, {self.knots[-1]}]"
            )
        return np.clip(x, self.knots[0], self.knots[-1])

    def __call__(self, x, nu=0):
        return self._spline(self._check(x), nu)

    def deriv(self, x):
        return self(x, 1)

    def second(self, x):
        return self(x, 2)


class Field2:
    """Node values on a TriGrid with tensor-bicubic interpolation."""

    order = 3

    def __init__(self, grid: TriGrid, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.N + 1, grid.Nsig + 1):
            raise ValueError(f"field shape {values.shape} does not match grid")
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite values")
        self.grid = grid
        self.values = values
        self._spline = None

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full((grid.N + 1, grid.Nsig + 1), float(value)))

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.u, grid.v[:, None] + 0.0 * grid.u),
                                    dtype=float))

    def spline(self) -> RectBivariateSpline:
        if self._spline is None:
            self._spline = RectBivariateSpline(
                self.grid.v, self.grid.sigma, self.values, kx=3, ky=3, s=0)
        return self._spline

    def eval_collapsed(self, sigma, v):
        return self.spline().ev(np.asarray(v, dtype=float),
                                np.asarray(sigma, dtype=float))

    def eval(self, u, v):
        """Interpolate at physical (u, v) inside the domain."""
        self.grid.check_inside(u, v)
        return self.eval_collapsed(self.grid.sigma_of(u, v), v)

    def line_fn(self, sigma_line: int) -> BoundaryFn:
        """Boundary function of the grid line sigma=0 (right shock) or
        sigma=1 (left shock) over v in [0, eps]."""
        i = 0 if sigma_line == 0 else self.grid.Nsig
        return BoundaryFn(self.grid.v, self.values[:, i])


def build_grid(epsilon, a, N, Nsig) -> TriGrid:
    return TriGrid(epsilon, a, N, Nsig)


def interp_eval(f, u, v=None):
    """Interpolate a Field2 at (u, v) or a BoundaryFn at u."""
    if isinstance(f, BoundaryFn):
        return f(u)
    return f.eval(u, v)


def integrate_u_row(f: Field2, j: int, u_a: float, u_b: float) -> float:
    """Composite trapezoid of f along row j restricted to [u_a, u_b]."""
    g = f.grid
    if not 0 <= j <= g.N:
        raise OutOfRow(f"row {j} outside 0..{g.N}")
    lo, hi = g.a * g.v[j], g.v[j]
    if u_a < lo - g._tol or u_b > hi + g._tol or u_a > u_b + g._tol:
        raise OutOfRow(f"[{u_a}, {u_b}] outside row range [{lo}, {hi}]")
    if j == 0 or u_b - u_a <= g._tol:
        return 0.0
    u_row = g.u[j]
    inside = (u_row > u_a + g._tol) & (u_row < u_b - g._tol)
    knots = np.concatenate(([u_a], u_row[inside], [u_b]))
    sig = g.sigma_of(knots, np.full_like(knots, g.v[j]))
    vals = f.eval_collapsed(sig, np.full_like(knots, g.v[j]))
    return float(np.trapz(vals, knots))


def integrate_v_curve(f: Field2, u: float, v_a: float, v_b: float) -> float:
    """Composite trapezoid of f along the v-curve at fixed u from v_a to v_b."""
    g = f.grid
    if v_a > v_b + g._tol:
        raise LeavesDomain(f"v_a={v_a} > v_b={v_b}")
    if u > v_a + g._tol or u < g.a * v_b - g._tol or v_b > g.epsilon + g._tol:
        raise LeavesDomain(
            f"curve u={u}, v in [{v_a}, {v_b}] leaves the domain"
        )
    if v_b - v_a <= g._tol:
        return 0.0
    inside = (g.v > v_a + g._tol) & (g.v < v_b - g._tol)
    knots = np.concatenate(([v_a], g.v[inside], [v_b]))
    sig = g.sigma_of(np.full_like(knots, u), knots)
    vals = f.eval_collapsed(sig, knots)
    return float(np.trapz(vals, knots))

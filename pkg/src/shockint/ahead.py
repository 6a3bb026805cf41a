"""States ahead of the emerged shocks: smooth solutions of the equations of
motion on each side, their bounding characteristics issuing from the
interaction point, and containment tests for the shock traces.

Three constructors are provided: constant states, simple waves (one Riemann
invariant constant, the other carried along straight characteristics of its
own family) and user-supplied analytic fields.  The first two are exact
solutions; user fields are trusted, with an optional residual check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import eos as eos_mod
from .eos import FluidState
from .errors import CharacteristicFocusing, ConfigError, HorizonExceeded
from .jump import ShockSide

_T_NEGATIVE_SLACK = 1e-12
FOCUSING_FLOOR = 0.1


class TanhProfile:
    """base + amp*tanh((x-center)/width); bounded with bounded derivatives."""

    def __init__(self, base, amp, width, center=0.0):
        if width <= 0.0:
            raise ConfigError(f"profile width {width} must be > 0")
        self.base = float(base)
        self.amp = float(amp)
        self.width = float(width)
        self.center = float(center)

    def __call__(self, x):
        return self.base + self.amp * np.tanh((np.asarray(x) - self.center) / self.width)

    def deriv(self, x):
        s = 1.0 / np.cosh((np.asarray(x) - self.center) / self.width)
        return self.amp / self.width * s * s

    def second(self, x):
        z = (np.asarray(x) - self.center) / self.width
        s = 1.0 / np.cosh(z)
        return -2.0 * self.amp / self.width**2 * s * s * np.tanh(z)


class LinearRampProfile:
    """base + slope*x; unbounded, useful to trigger focusing deliberately."""

    def __init__(self, base, slope):
        self.base = float(base)
        self.slope = float(slope)

    def __call__(self, x):
        return self.base + self.slope * np.asarray(x)

    def deriv(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.slope)

    def second(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


class ConstantField:
    """Constant (rho, w) on one side; the classical piecewise-constant case."""

    kind = "constant"

    def __init__(self, eos, side: ShockSide, state: FluidState, t_max=1.0):
        self.eos = eos
        self.side = side
        self.t_max = float(t_max)
        self.state = state
        pair = eos_mod.to_invariants(eos, state)
        self._alpha = pair.alpha
        self._beta = pair.beta

    def eval(self, t, x):
        if np.isscalar(t) and np.isscalar(x):
            return self._alpha, self._beta
        t = np.asarray(t, dtype=float)
        shape = np.broadcast(t, np.asarray(x)).shape
        return (np.full(shape, self._alpha), np.full(shape, self._beta))

    def partials(self, t, x):
        if np.isscalar(t) and np.isscalar(x):
            return 0.0, 0.0, 0.0, 0.0
        shape = np.broadcast(np.asarray(t), np.asarray(x)).shape
        z = np.zeros(shape)
        return z, z.copy(), z.copy(), z.copy()

    def boosted(self, b):
        return ConstantField(
            self.eos, self.side, FluidState(self.state.rho, self.state.w - b),
            t_max=self.t_max,
        )


class SimpleWaveField:
    """Exact smooth non-constant solution with one invariant constant.

    family "out": beta identically ``fixed_invariant``; alpha is constant
    along straight outgoing characteristics x = x0 + c_out(alpha0(x0))*t.
    family "in": the mirror statement with c_in.  The implicit straight-line
    relation is solved per query by bracketed Newton to 1e-12.
    """

    kind = "simple-wave"

    def __init__(self, eos, side: ShockSide, fixed_invariant, profile, family,
                 t_max=1.0, x_range=(-10.0, 10.0), nsample=2001):
        if family not in ("out", "in"):
            raise ConfigError(f"unknown simple-wave family {family!r}")
        self.eos = eos
        self.side = side
        self.family = family
        self.fixed = float(fixed_invariant)
        self.profile = profile
        self.t_max = float(t_max)
        self._x_range = x_range

        xs = np.linspace(x_range[0], x_range[1], nsample)
        speeds = self._speed(xs)
        slopes = self._speed_slope(xs)
        worst = 1.0 + self.t_max * min(0.0, float(np.min(slopes)))
        if worst <= FOCUSING_FLOOR:
            raise CharacteristicFocusing(
                f"1 + t_max*min(dspeed/dx0) = {worst} <= {FOCUSING_FLOOR}: "
                "the field would shock inside the horizon"
            )
        pad = 1e-9 + 0.01 * (float(np.max(speeds)) - float(np.min(speeds)))
        self._s_lo = float(np.min(speeds)) - pad
        self._s_hi = float(np.max(speeds)) + pad

    def _pair(self, varying):
        if self.family == "out":
            return varying, self.fixed       # (alpha, beta)
        return self.fixed, varying           # alpha fixed, beta varying

    def _speed(self, x0):
        a, b = self._pair(self.profile(x0))
        jet = eos_mod.char_jet(self.eos, a, b)
        return jet.c_out if self.family == "out" else jet.c_in

    def _speed_slope(self, x0):
        a, b = self._pair(self.profile(x0))
        jet = eos_mod.char_jet(self.eos, a, b)
        coeff = jet.co_a if self.family == "out" else jet.ci_b
        return coeff * self.profile.deriv(x0)

    def _foot(self, t, x):
        """Characteristic foot point x0 with x0 + speed(x0)*t = x."""
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t_b, x_b = np.broadcast_arrays(t, x)
        shape = t_b.shape
        t_f = t_b.reshape(-1).astype(float)
        x_f = x_b.reshape(-1).astype(float)
        lo = x_f - self._s_hi * t_f
        hi = x_f - self._s_lo * t_f
        x0 = x_f - self._speed(x_f) * t_f  # first guess: speed frozen at x
        x0 = np.clip(x0, lo, hi)
        for _ in range(60):
            g = x0 + self._speed(x0) * t_f - x_f
            if np.all(np.abs(g) <= 1e-12 * np.maximum(1.0, np.abs(x_f))):
                break
            gp = 1.0 + t_f * self._speed_slope(x0)
            lo = np.where(g < 0.0, x0, lo)
            hi = np.where(g > 0.0, x0, hi)
            step = np.where(np.abs(gp) > 1e-3, g / np.where(gp == 0.0, 1.0, gp), 0.0)
            cand = x0 - step
            bad = (cand <= lo) | (cand >= hi) | (np.abs(gp) <= 1e-3)
            x0 = np.where(bad, 0.5 * (lo + hi), cand)
        return x0.reshape(shape)

    def _speed_scalar(self, x0):
        var = float(self.profile(x0))
        a, b = self._pair(var)
        s = 0.5 * (a + b)
        w = 0.5 * (a - b)
        eta = float(self.eos._eta_of_s(s))
        return w + eta if self.family == "out" else w - eta

    def _slope_scalar(self, x0):
        var = float(self.profile(x0))
        a, b = self._pair(var)
        de = float(self.eos._deta_ds(0.5 * (a + b)))
        coeff = 0.5 + 0.5 * de if self.family == "out" else -0.5 - 0.5 * de
        return coeff * float(self.profile.deriv(x0))

    def _foot_scalar(self, t, x):
        if t == 0.0:
            return x
        lo, hi = x - self._s_hi * t, x - self._s_lo * t
        x0 = min(max(x - self._speed_scalar(x) * t, lo), hi)
        tol = 1e-12 * max(1.0, abs(x))
        for _ in range(80):
            g = x0 + self._speed_scalar(x0) * t - x
            if abs(g) <= tol:
                return x0
            if g < 0.0:
                lo = x0
            else:
                hi = x0
            gp = 1.0 + t * self._slope_scalar(x0)
            cand = x0 - g / gp if abs(gp) > 1e-3 else 0.5 * (lo + hi)
            x0 = cand if lo < cand < hi else 0.5 * (lo + hi)
        return x0

    def eval(self, t, x):
        if np.isscalar(t) and np.isscalar(x):
            x0 = self._foot_scalar(float(t), float(x))
            a, b = self._pair(float(self.profile(x0)))
            return float(a), float(b)
        x0 = self._foot(t, x)
        var = self.profile(x0)
        a, b = self._pair(var)
        shape = np.shape(x0)
        return (np.broadcast_to(np.asarray(a, dtype=float), shape).copy(),
                np.broadcast_to(np.asarray(b, dtype=float), shape).copy())

    def partials(self, t, x):
        t = np.asarray(t, dtype=float)
        x0 = self._foot(t, x)
        denom = 1.0 + t * self._speed_slope(x0)
        dvar_dx = self.profile.deriv(x0) / denom
        dvar_dt = -self.profile.deriv(x0) * self._speed(x0) / denom
        z = np.zeros_like(np.asarray(dvar_dx, dtype=float))
        if self.family == "out":
            return (np.asarray(dvar_dt, dtype=float),
                    np.asarray(dvar_dx, dtype=float), z, z.copy())
        return (z, z.copy(), np.asarray(dvar_dt, dtype=float),
                np.asarray(dvar_dx, dtype=float))

    def boosted(self, b):
        return BoostedField(self, b)


class UserAnalyticField:
    """Caller-supplied invariant field; trusted to solve the equations of
    motion.  ``partials_fn`` may be omitted, in which case central
    differences of ``eval_fn`` are used."""

    kind = "user-analytic"

    def __init__(self, eos, side: ShockSide, eval_fn, partials_fn=None,
                 t_max=1.0, fd_step=1e-7):
        self.eos = eos
        self.side = side
        self.t_max = float(t_max)
        self._eval = eval_fn
        self._partials = partials_fn
        self._h = float(fd_step)

    def eval(self, t, x):
        a, b = self._eval(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
        return np.asarray(a, dtype=float), np.asarray(b, dtype=float)

    def partials(self, t, x):
        if self._partials is not None:
            out = self._partials(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
            return tuple(np.asarray(v, dtype=float) for v in out)
        h = self._h
        ap, bp = self.eval(t + h, x)
        am, bm = self.eval(t - h, x)
        a_t, b_t = (ap - am) / (2 * h), (bp - bm) / (2 * h)
        ap, bp = self.eval(t, x + h)
        am, bm = self.eval(t, x - h)
        a_x, b_x = (ap - am) / (2 * h), (bp - bm) / (2 * h)
        return a_t, a_x, b_t, b_x

    def boosted(self, b):
        return BoostedField(self, b)


class BoostedField:
    """Galilean boost wrapper: in the frame moving with velocity b the field
    values are alpha-b, beta+b evaluated at the lab point x + b*t."""

    def __init__(self, inner, b):
        self.inner = inner
        self.b = float(b)
        self.eos = inner.eos
        self.side = inner.side
        self.kind = inner.kind
        self.t_max = inner.t_max

    def eval(self, t, x):
        if not (np.isscalar(t) and np.isscalar(x)):
            t = np.asarray(t, dtype=float)
            x = np.asarray(x, dtype=float)
        a, bb = self.inner.eval(t, x + self.b * t)
        return a - self.b, bb + self.b

    def partials(self, t, x):
        if not (np.isscalar(t) and np.isscalar(x)):
            t = np.asarray(t, dtype=float)
            x = np.asarray(x, dtype=float)
        a_t, a_x, b_t, b_x = self.inner.partials(t, x + self.b * t)
        return a_t + self.b * a_x, a_x, b_t + self.b * b_x, b_x

    def boosted(self, b):
        return BoostedField(self.inner, self.b + b)


class MirroredField:
    """Spatial mirror (x -> -x, w -> -w): swaps the invariant roles and the
    shock side; the mirror of an exact solution is an exact solution."""

    def __init__(self, inner):
        self.inner = inner
        self.eos = inner.eos
        self.side = ShockSide.LEFT if inner.side is ShockSide.RIGHT else ShockSide.RIGHT
        self.kind = inner.kind
        self.t_max = inner.t_max

    def eval(self, t, x):
        a, b = self.inner.eval(t, -x if np.isscalar(x) else -np.asarray(x, dtype=float))
        return b, a

    def partials(self, t, x):
        xm = -x if np.isscalar(x) else -np.asarray(x, dtype=float)
        a_t, a_x, b_t, b_x = self.inner.partials(t, xm)
        return b_t, -b_x, a_t, -a_x

    def boosted(self, b):
        return BoostedField(self, b)


@dataclass
class BoundaryChar:
    """Characteristic bounding the future development, integrated from the
    interaction point: dx/dt = c_in* (left side) or c_out* (right side)."""

    side: ShockSide
    ts: np.ndarray
    xs: np.ndarray
    speeds: np.ndarray
    _spline: CubicSpline

    def x_of(self, t):
        return self._spline(t)

    def speed_of(self, t):
        return self._spline(t, 1)


def make_constant(eos, side: ShockSide, state: FluidState, t_max=1.0) -> ConstantField:
    return ConstantField(eos, side, state, t_max=t_max)


def make_simple_wave(eos, side: ShockSide, fixed_invariant, profile, family,
                     t_max=1.0, **kw) -> SimpleWaveField:
    return SimpleWaveField(eos, side, fixed_invariant, profile, family,
                           t_max=t_max, **kw)


def _char_speed(field, t, x):
    a, b = field.eval(t, x)
    if np.isscalar(a):
        s, w = 0.5 * (a + b), 0.5 * (a - b)
        eta = float(field.eos._eta_of_s(s))
        return w - eta if field.side is ShockSide.LEFT else w + eta
    jet = eos_mod.char_jet(field.eos, a, b)
    return jet.c_in if field.side is ShockSide.LEFT else jet.c_out


def boundary_characteristic(field, nsteps=2048) -> BoundaryChar:
    """Integrate the bounding characteristic from the origin by classical RK4
    at fixed step t_max/nsteps."""
    h = field.t_max / nsteps
    ts = np.linspace(0.0, field.t_max, nsteps + 1)
    xs = np.empty(nsteps + 1)
    xs[0] = 0.0
    x = 0.0
    for k in range(nsteps):
        t = ts[k]
        k1 = _char_speed(field, t, x)
        k2 = _char_speed(field, t + 0.5 * h, x + 0.5 * h * k1)
        k3 = _char_speed(field, t + 0.5 * h, x + 0.5 * h * k2)
        k4 = _char_speed(field, t + h, x + h * k3)
        x = x + h / 6.0 * (float(k1) + 2.0 * float(k2) + 2.0 * float(k3) + float(k4))
        xs[k + 1] = x
    speeds = np.asarray(_char_speed(field, ts, xs), dtype=float)
    return BoundaryChar(side=field.side, ts=ts, xs=xs, speeds=speeds,
                        _spline=CubicSpline(ts, xs))


def contains(field, bchar: BoundaryChar, t, x):
    """Signed distance of (t, x) from the bounding characteristic; >= 0 means
    the point lies inside the future development of the data."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -_T_NEGATIVE_SLACK) or np.any(t > field.t_max * (1 + 1e-12)):
        raise HorizonExceeded(
            f"t range [{float(np.min(t))}, {float(np.max(t))}] outside "
            f"[0, {field.t_max}]"
        )
    xb = bchar.x_of(np.clip(t, 0.0, field.t_max))
    if field.side is ShockSide.LEFT:
        return xb - np.asarray(x, dtype=float)
    return np.asarray(x, dtype=float) - xb


def pde_residual(field, t, x):
    """(L_out alpha, L_in beta) evaluated from the field's own partials;
    vanishes for exact solutions of the equations of motion."""
    a, b = field.eval(t, x)
    jet = eos_mod.char_jet(field.eos, a, b)
    a_t, a_x, b_t, b_x = field.partials(t, x)
    return a_t + jet.c_out * a_x, b_t + jet.c_in * b_x


def validate_field(field, t_pts, x_pts, tol=1e-6):
    """Max PDE residual over sample points; used by --validate-ahead."""
    r_out, r_in = pde_residual(field, t_pts, x_pts)
    worst = max(float(np.max(np.abs(r_out))), float(np.max(np.abs(r_in))))
    return worst, worst <= tol


def _profile_from_config(block: dict):
    kind = block.get("type", "tanh")
    if kind == "tanh":
        try:
            return TanhProfile(base=block["base"], amp=block["amp"],
                               width=block["width"], center=block.get("center", 0.0))
        except KeyError as err:
            raise ConfigError(f"tanh profile missing key {err}") from err
    if kind == "linear":
        try:
            return LinearRampProfile(base=block["base"], slope=block["slope"])
        except KeyError as err:
            raise ConfigError(f"linear profile missing key {err}") from err
    raise ConfigError(f"unknown profile type {kind!r}")


def field_from_config(eos, side: ShockSide, block: dict):
    kind = block.get("kind")
    t_max = block.get("t_max", 1.0)
    if kind == "constant":
        try:
            state = FluidState(rho=block["rho"], w=block["w"])
        except KeyError as err:
            raise ConfigError(f"constant field missing key {err}") from err
        return make_constant(eos, side, state, t_max=t_max)
    if kind == "simple_wave":
        family = block.get("family")
        key = "fixed_beta" if family == "out" else "fixed_alpha"
        if key not in block:
            raise ConfigError(f"simple_wave field needs {key!r} for family {family!r}")
        profile = _profile_from_config(block.get("profile", {}))
        return make_simple_wave(eos, side, block[key], profile, family, t_max=t_max)
    raise ConfigError(f"unknown ahead-field kind {kind!r}")

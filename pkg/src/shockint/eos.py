"""Barotropic equation of state and the algebra between physical variables
(rho, w) and Riemann invariants (alpha, beta).

The polytropic law p = kappa*rho**gamma (gamma > 1) ships with closed forms
for the sound speed, the Riemann potential F(rho) = integral of eta/rho
(gauged so F(0) = 0) and its inverse.  A general analytic law can be plugged
in through :class:`AnalyticEos`; it is trusted up to cheap self-consistency
checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import NonPositiveDensity, OutOfRangeInvariants, ConfigError


@dataclass(frozen=True)
class FluidState:
    rho: float
    w: float

    def __post_init__(self):
        if not self.rho > 0.0:
            raise NonPositiveDensity(f"rho={self.rho} must be > 0")


@dataclass(frozen=True)
class RiemannPair:
    alpha: float
    beta: float


@dataclass(frozen=True)
class CharSpeeds:
    c_out: float
    c_in: float


class CharJet(NamedTuple):
    """Characteristic speeds and their partials with respect to (alpha, beta).

    All entries broadcast with the query arrays.  Second partials are exact
    zeros for the polytropic law (the sound speed is linear in alpha+beta).
    """

    rho: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    c_out: np.ndarray
    c_in: np.ndarray
    co_a: np.ndarray
    co_b: np.ndarray
    ci_a: np.ndarray
    ci_b: np.ndarray
    co_aa: np.ndarray
    co_ab: np.ndarray
    co_bb: np.ndarray
    ci_aa: np.ndarray
    ci_ab: np.ndarray
    ci_bb: np.ndarray


class PolytropicEos:
    """p = kappa * rho**gamma with gamma > 1, kappa > 0.

    eta(rho)  = sqrt(gamma*kappa) * rho**((gamma-1)/2)
    F(rho)    = 2*sqrt(gamma*kappa)/(gamma-1) * rho**((gamma-1)/2),  F(0) = 0
    In invariant variables s = (alpha+beta)/2 this gives the closed forms
    rho = F^-1(s) and eta = (gamma-1)*s/2.
    """

    kind = "polytropic"

    def __init__(self, kappa=1.0, gamma=2.0):
        if not kappa > 0.0:
            raise ConfigError(f"kappa={kappa} must be > 0")
        if not gamma > 1.0:
            raise ConfigError(
                f"gamma={gamma} not supported: the F(0)=0 gauge needs gamma > 1"
            )
        self.kappa = float(kappa)
        self.gamma = float(gamma)
        self.rho_ref = 0.0
        self._c = math.sqrt(gamma * kappa)

    def pressure(self, rho):
        return self.kappa * np.asarray(rho, dtype=float) ** self.gamma

    def sound_speed(self, rho):
        return self._c * np.asarray(rho, dtype=float) ** ((self.gamma - 1.0) / 2.0)

    def potential(self, rho):
        return 2.0 * self._c / (self.gamma - 1.0) * np.asarray(rho, dtype=float) ** (
            (self.gamma - 1.0) / 2.0
        )

    def potential_inverse(self, s):
        s = np.asarray(s, dtype=float)
        return ((self.gamma - 1.0) * s / (2.0 * self._c)) ** (2.0 / (self.gamma - 1.0))

    def _eta_of_s(self, s):
        return (self.gamma - 1.0) * s / 2.0

    def _deta_ds(self, s):
        if np.isscalar(s):
            return (self.gamma - 1.0) / 2.0
        return np.full_like(np.asarray(s, dtype=float), (self.gamma - 1.0) / 2.0)

    def _d2eta_ds2(self, s):
        if np.isscalar(s):
            return 0.0
        return np.zeros_like(np.asarray(s, dtype=float))


class AnalyticEos:
    """User-supplied barotropic law, trusted after self-consistency checks.

    Parameters
    ----------
    p, dp_drho : callables of rho
    potential : callable of rho, the Riemann potential F (any monotone gauge)
    potential_inverse : optional callable; if omitted F is inverted by
        safeguarded Newton (bisection fallback) to abs. tol 1e-13
    d2p_drho2 : optional; used for the sound-speed derivative, otherwise a
        central difference of dp_drho is taken
    rho_check : (lo, hi) density interval for the validation sample
    """

    kind = "tabulated-analytic"

    def __init__(self, p, dp_drho, potential, potential_inverse=None,
                 d2p_drho2=None, rho_check=(1e-3, 10.0), nsample=64):
        self._p = p
        self._dp = dp_drho
        self._d2p = d2p_drho2
        self._F = potential
        self._Finv = potential_inverse
        self.rho_ref = rho_check[0]
        self._rho_lo, self._rho_hi = rho_check
        sample = np.geomspace(self._rho_lo, self._rho_hi, nsample)
        dp = np.asarray([dp_drho(r) for r in sample], dtype=float)
        if not np.all(dp > 0.0):
            raise ConfigError("analytic EOS violates dp/drho > 0 on the sample grid")
        fv = np.asarray([potential(r) for r in sample], dtype=float)
        if not np.all(np.diff(fv) > 0.0):
            raise ConfigError("analytic EOS potential is not strictly increasing")

    def pressure(self, rho):
        return np.asarray(np.vectorize(self._p)(rho), dtype=float)

    def sound_speed(self, rho):
        return np.sqrt(np.asarray(np.vectorize(self._dp)(rho), dtype=float))

    def potential(self, rho):
        return np.asarray(np.vectorize(self._F)(rho), dtype=float)

    def potential_inverse(self, s):
        if self._Finv is not None:
            return np.asarray(np.vectorize(self._Finv)(s), dtype=float)
        return np.asarray(np.vectorize(self._invert_potential)(s), dtype=float)

    def _invert_potential(self, s):
        lo, hi = self._rho_lo, self._rho_hi
        flo, fhi = self._F(lo), self._F(hi)
        if not flo <= s <= fhi:
            raise OutOfRangeInvariants(
                f"potential value {s} outside sampled range [{flo}, {fhi}]"
            )
        rho = 0.5 * (lo + hi)
        for _ in range(100):
            f = self._F(rho) - s
            if f > 0.0:
                hi = rho
            else:
                lo = rho
            deriv = math.sqrt(self._dp(rho)) / rho
            step = f / deriv
            cand = rho - step
            if not lo < cand < hi:
                cand = 0.5 * (lo + hi)
            if abs(cand - rho) < 1e-13:
                return cand
            rho = cand
        return rho

    def _eta_of_s(self, s):
        rho = self.potential_inverse(s)
        return self.sound_speed(rho)

    def _deta_ds(self, s):
        # d eta/d s = eta'(rho) * rho/eta with eta' = p''/(2 eta)
        s = np.asarray(s, dtype=float)
        rho = self.potential_inverse(s)
        eta = self.sound_speed(rho)
        if self._d2p is not None:
            d2p = np.asarray(np.vectorize(self._d2p)(rho), dtype=float)
        else:
            h = 1e-6 * np.maximum(1.0, rho)
            d2p = (np.asarray(np.vectorize(self._dp)(rho + h), dtype=float)
                   - np.asarray(np.vectorize(self._dp)(rho - h), dtype=float)) / (2 * h)
        return d2p * rho / (2.0 * eta * eta)

    def _d2eta_ds2(self, s):
        s = np.asarray(s, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(s))
        return (self._deta_ds(s + h) - self._deta_ds(s - h)) / (2 * h)


Eos = PolytropicEos | AnalyticEos


def from_config(block: dict) -> Eos:
    """Build an EOS from its run-configuration block."""
    kind = block.get("kind", "polytropic")
    if kind != "polytropic":
        raise ConfigError(f"unknown eos kind {kind!r} in configuration")
    return PolytropicEos(kappa=block.get("kappa", 1.0), gamma=block.get("gamma", 2.0))


def pressure_and_sound_speed(eos: Eos, rho: float) -> tuple[float, float]:
    """Return (p(rho), eta(rho)) with eta = sqrt(dp/drho)."""
    if not np.all(np.asarray(rho) > 0.0):
        raise NonPositiveDensity(f"rho={rho} must be > 0")
    return float(eos.pressure(rho)), float(eos.sound_speed(rho))


def _potential_floor(eos) -> float:
    return float(eos.potential(eos.rho_ref)) if eos.rho_ref > 0.0 else 0.0


def _potential_mean(eos, alpha, beta):
    s = 0.5 * (np.asarray(alpha, dtype=float) + np.asarray(beta, dtype=float))
    if not np.all(s > _potential_floor(eos)):
        raise OutOfRangeInvariants(
            "(alpha+beta)/2 below the range of the Riemann potential"
        )
    return s


def to_invariants(eos: Eos, state: FluidState) -> RiemannPair:
    f = float(eos.potential(state.rho))
    return RiemannPair(alpha=f + state.w, beta=f - state.w)


def from_invariants(eos: Eos, pair: RiemannPair) -> FluidState:
    s = _potential_mean(eos, pair.alpha, pair.beta)
    rho = float(eos.potential_inverse(s))
    return FluidState(rho=rho, w=0.5 * (pair.alpha - pair.beta))


def riemann_maps(eos: Eos, obj):
    """Map a FluidState to its RiemannPair or invert a RiemannPair."""
    if isinstance(obj, FluidState):
        return to_invariants(eos, obj)
    if isinstance(obj, RiemannPair):
        return from_invariants(eos, obj)
    raise TypeError(f"expected FluidState or RiemannPair, got {type(obj)!r}")


def char_jet(eos: Eos, alpha, beta) -> CharJet:
    """Characteristic speeds c_out = w+eta, c_in = w-eta and all partials
    up to second order with respect to (alpha, beta), vectorized."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    s = _potential_mean(eos, alpha, beta)
    w = 0.5 * (alpha - beta)
    rho = eos.potential_inverse(s)
    eta = eos._eta_of_s(s)
    de = eos._deta_ds(s)   # d eta / d s
    d2e = eos._d2eta_ds2(s)
    half_de = 0.5 * de
    quarter_d2e = 0.25 * d2e
    return CharJet(
        rho=rho, w=w, eta=eta,
        c_out=w + eta, c_in=w - eta,
        co_a=0.5 + half_de, co_b=-0.5 + half_de,
        ci_a=0.5 - half_de, ci_b=-0.5 - half_de,
        co_aa=quarter_d2e, co_ab=quarter_d2e, co_bb=quarter_d2e,
        ci_aa=-quarter_d2e, ci_ab=-quarter_d2e, ci_bb=-quarter_d2e,
    )


def char_speeds_and_partials(eos: Eos, pair: RiemannPair) -> tuple[CharSpeeds, CharJet]:
    """Scalar wrapper around :func:`char_jet` for a single RiemannPair."""
    jet = char_jet(eos, pair.alpha, pair.beta)
    return CharSpeeds(c_out=float(jet.c_out), c_in=float(jet.c_in)), jet


def invariants_arrays(eos: Eos, alpha, beta):
    """(rho, w, eta) arrays from invariant arrays; raises on invalid points."""
    s = _potential_mean(eos, alpha, beta)
    rho = eos.potential_inverse(s)
    w = 0.5 * (np.asarray(alpha, dtype=float) - np.asarray(beta, dtype=float))
    return rho, w, eos._eta_of_s(s)

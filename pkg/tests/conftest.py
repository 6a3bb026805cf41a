"""Shared fixtures: the two shipped scenarios and their converged solutions.

Frozen reference constants are computed from closed forms independent of the
library (plain arithmetic on the symmetric gamma=2 data): the behind state
(rho, w) = (2, 0) solves the quadratic 2*w_minus^2 = 3, the shock speeds are
-+sqrt(1.5), and the geometry constants follow from eta0 = 2.
"""

import math

import numpy as np
import pytest

from shockint import ahead as ahead_mod
from shockint import eos as eos_mod
from shockint import origin as origin_mod
from shockint import scheme as scheme_mod
from shockint.grid import build_grid
from shockint.jump import ShockSide

W15 = math.sqrt(1.5)                      # ahead |w| and emerged |V|
F_AT_1 = 2.0 * math.sqrt(2.0)             # Riemann potential at rho = 1
ALPHA_RIGHT = F_AT_1 - W15                # 1.6036822533546013
BETA_RIGHT = F_AT_1 + W15                 # 4.053171996137779
ETA0 = 2.0
GAMMA0_EXACT = -(ETA0 - W15) / (ETA0 + W15)          # -0.24040820577345767
A_EXACT = GAMMA0_EXACT**2                            # 0.057796105403213165
DETM_EXACT = 1.0 - A_EXACT**3                        # 0.9998069384790441
JACOBIAN_EXACT = -2.0 / (ETA0 * GAMMA0_EXACT)        # 4.159591794226539
X0_AT_001_002 = 0.01 / GAMMA0_EXACT + 0.02           # -0.0215959179422654
T_AT_001_002 = (0.02 - 0.01 / GAMMA0_EXACT) / ETA0   # 0.030797958971132695

PERTURB_AMP = 0.02
PERTURB_WIDTH = 1.0


@pytest.fixture(scope="session")
def eos2():
    return eos_mod.PolytropicEos(kappa=1.0, gamma=2.0)


def make_constant_fields(eos):
    left = ahead_mod.make_constant(eos, ShockSide.LEFT,
                                   eos_mod.FluidState(1.0, +W15))
    right = ahead_mod.make_constant(eos, ShockSide.RIGHT,
                                    eos_mod.FluidState(1.0, -W15))
    return left, right


def make_perturbed_fields(eos, amp=PERTURB_AMP, width=PERTURB_WIDTH):
    left = ahead_mod.make_simple_wave(
        eos, ShockSide.LEFT, BETA_RIGHT,
        ahead_mod.TanhProfile(base=ALPHA_RIGHT, amp=-amp, width=width), "in")
    right = ahead_mod.make_simple_wave(
        eos, ShockSide.RIGHT, BETA_RIGHT,
        ahead_mod.TanhProfile(base=ALPHA_RIGHT, amp=+amp, width=width), "out")
    return left, right


class Case:
    def __init__(self, eos, left, right, ipd, grid, config, solution, diag):
        self.eos = eos
        self.left = left
        self.right = right
        self.ipd = ipd
        self.grid = grid
        self.config = config
        self.solution = solution
        self.diag = diag


def solve_case(eos, left, right, epsilon, n, tol_iter=1e-11) -> Case:
    ipd, left, right = origin_mod.build_interaction_data(eos, left, right)
    grid = build_grid(epsilon, ipd.a, n, n)
    config = scheme_mod.SchemeConfig(eos=eos, left_field=left,
                                     right_field=right, ipd=ipd, grid=grid,
                                     tol_iter=tol_iter)
    solution, diag = scheme_mod.run_iteration(config)
    return Case(eos, left, right, ipd, grid, config, solution, diag)


@pytest.fixture(scope="session")
def case_cache(eos2):
    cache = {}

    def get(kind, epsilon=0.02, n=64):
        key = (kind, epsilon, n)
        if key not in cache:
            maker = make_constant_fields if kind == "constant" \
                else make_perturbed_fields
            left, right = maker(eos2)
            cache[key] = solve_case(eos2, left, right, epsilon, n)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def constant_case(case_cache):
    return case_cache("constant")


@pytest.fixture(scope="session")
def perturbed_case(case_cache):
    return case_cache("perturbed")


@pytest.fixture(scope="session")
def symmetric_ipd(eos2):
    left, right = make_constant_fields(eos2)
    ipd, _, _ = origin_mod.build_interaction_data(eos2, left, right)
    return ipd

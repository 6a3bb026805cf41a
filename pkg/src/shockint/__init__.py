"""Local solution of two colliding shocks in plane-symmetric barotropic flow.

The pipeline solves the interaction-point jump conditions, runs a
characteristic-coordinate fixed-point iteration for the state between the
emerged shocks and the free shock boundaries, and certifies the result with
a residual suite.
"""

from . import errors
from .eos import (
    AnalyticEos,
    CharSpeeds,
    FluidState,
    PolytropicEos,
    RiemannPair,
    char_jet,
    char_speeds_and_partials,
    from_invariants,
    pressure_and_sound_speed,
    riemann_maps,
    to_invariants,
)
from .jump import (
    JumpPair,
    ShockSide,
    determinism_check,
    hugoniot_residual,
    jump_coefficients,
    shock_speed,
    solve_hugoniot,
)
from .ahead import (
    BoundaryChar,
    ConstantField,
    MirroredField,
    SimpleWaveField,
    TanhProfile,
    UserAnalyticField,
    boundary_characteristic,
    contains,
    make_constant,
    make_simple_wave,
    pde_residual,
)
from .origin import (
    InteractionPointData,
    build_interaction_data,
    geometry_constants,
    initial_derivatives,
    normalize_frame,
    solve_interaction_point,
)
from .grid import (
    BoundaryFn,
    Field2,
    TriGrid,
    build_grid,
    integrate_u_row,
    integrate_v_curve,
    interp_eval,
)
from .scheme import (
    ConvergenceDiag,
    IterateSnapshot,
    SchemeConfig,
    assemble_sources,
    init_iterate,
    reconstruct_t,
    run_iteration,
    trace_shocks,
    update_invariants,
    update_x,
)
from .verify import ResidualReport, asymptotic_check, residual_suite, uniqueness_restart

__version__ = "0.1.0"

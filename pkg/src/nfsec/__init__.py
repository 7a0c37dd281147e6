"""Robust near-field secure beamforming under eavesdropper location uncertainty."""

from .geometry import (
    SPEED_OF_LIGHT,
    ArrayGeometry,
    LosChannel,
    PolarLocation,
    antenna_coords,
    cart_to_polar,
    default_reference_gain,
    los_channel,
    polar_to_cart,
    steering_matrix,
    steering_vector,
    steering_vector_exact,
)
from .uncertainty import (
    FanSubRegion,
    LocationUncertainty,
    SectorOutsideDiscError,
    confidence_radius,
    disc_range_interval,
    partition_region,
    polar_error_bounds,
    sector_range_interval,
)
from .steering_error import (
    ErrorBudget,
    SteeringGradients,
    angle_error_law,
    error_budget,
    fresnel_cs,
    range_error_law,
    steering_error,
    steering_gradients,
    taylor_error_bound,
    taylor_steering_vector,
)
from .lmi import (
    LeakageThreshold,
    LmiBlock,
    TightenedThreshold,
    VectorTerm,
    build_error_bound_lmi,
    build_multiuser_lmis,
    build_refined_lmi,
    leakage_threshold,
    nlos_tightened_threshold,
    prop1_power_cap,
)
from .conic import (
    CompiledProgram,
    ConicProgram,
    ConicSolution,
    LinearObjective,
    QuadCone,
    solve_conic,
)
from .scenario import Scenario, default_scenario
from .optimizer import (
    Scheme,
    SolveOptions,
    SolveReport,
    SolverFailure,
    build_secrecy_constraints,
    constraints_satisfied,
    initialize_beamformers,
    sca_surrogate_multi,
    sca_surrogate_single,
    solve_scheme,
)
from .evaluation import (
    EvalReport,
    beam_pattern,
    bob_rates,
    evaluate,
    eve_rate,
    secure_probability,
    worst_case_leakage,
)

__version__ = "0.1.0"

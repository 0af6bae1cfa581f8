"""Choreographic n-body orbits on the hyperbolic plane.

The shared periodic orbit is a trigonometric polynomial on the Poincare
disk; solutions are minimizers of the hyperbolic action, found by BFGS
with the exact gradient and refined by Newton's method with the exact
Hessian, then verified against the projected equations of motion.  The
flat (planar) problem is the R = inf case throughout.
"""

from .action import (
    ActionEvaluation,
    CollisionError,
    Configuration,
    action_gradient,
    action_hessian,
    action_value,
    evaluate,
    hyperboloid_energies,
    pairwise_separations,
    quadrature_size,
)
from .continuation import (
    ContinuationResult,
    FamilyMember,
    center_planar,
    continue_in_R,
    convergence_rate,
    planar_limit_diff,
    solve_planar,
)
from .geometry import (
    GeometryError,
    HyperboloidPoint,
    OffSheetError,
    OutOfDiskError,
    conformal_factor,
    disk_distance,
    disk_geodesic,
    geodesic_hyperboloid,
    lift_to_hyperboloid,
    lift_velocity,
    lorentz_inner,
    project_to_disk,
    rescale_period,
)
from .optimizer import (
    Choreography,
    InfeasibleSeedError,
    Phase1Options,
    Phase2Options,
    PhaseResult,
    SolveFailure,
    minimize_bfgs,
    phase1_bfgs,
    phase2_newton,
    random_seed,
    solve,
)
from .solutions import (
    FORMAT_VERSION,
    MalformedSolutionError,
    bundled_names,
    load_bundled,
    load_solution,
    save_solution,
)
from .trigpath import (
    NodeValues,
    TrigPath,
    nodes,
    pack_vars,
    rotate_vars,
    shift_vars,
    trapezoid_integral,
    unpack_vars,
)
from .verify import (
    PhaseRecord,
    ResidualTerms,
    SolveReport,
    VerificationResult,
    VerificationThresholds,
    coefficient_decay,
    extrinsic_residual,
    motion_residual,
    path_residual,
    residual_terms,
    verify_all,
)

__version__ = "0.1.0"

__all__ = [
    "ActionEvaluation",
    "Choreography",
    "CollisionError",
    "Configuration",
    "ContinuationResult",
    "FORMAT_VERSION",
    "FamilyMember",
    "GeometryError",
    "HyperboloidPoint",
    "InfeasibleSeedError",
    "MalformedSolutionError",
    "NodeValues",
    "OffSheetError",
    "OutOfDiskError",
    "Phase1Options",
    "Phase2Options",
    "PhaseRecord",
    "PhaseResult",
    "ResidualTerms",
    "SolveFailure",
    "SolveReport",
    "TrigPath",
    "VerificationResult",
    "VerificationThresholds",
    "action_gradient",
    "action_hessian",
    "action_value",
    "bundled_names",
    "center_planar",
    "coefficient_decay",
    "conformal_factor",
    "continue_in_R",
    "convergence_rate",
    "disk_distance",
    "disk_geodesic",
    "evaluate",
    "extrinsic_residual",
    "geodesic_hyperboloid",
    "hyperboloid_energies",
    "lift_to_hyperboloid",
    "lift_velocity",
    "load_bundled",
    "load_solution",
    "lorentz_inner",
    "minimize_bfgs",
    "motion_residual",
    "nodes",
    "pack_vars",
    "pairwise_separations",
    "path_residual",
    "phase1_bfgs",
    "phase2_newton",
    "planar_limit_diff",
    "project_to_disk",
    "quadrature_size",
    "random_seed",
    "rescale_period",
    "residual_terms",
    "rotate_vars",
    "save_solution",
    "shift_vars",
    "solve",
    "solve_planar",
    "trapezoid_integral",
    "unpack_vars",
    "verify_all",
]

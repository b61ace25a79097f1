"""Competition dynamics on patchy landscapes with interface jump conditions."""

from .errors import (
    EigenSolveError,
    GridResolutionError,
    NumericalError,
    SimulationBlowUpError,
    SteadyConvergenceError,
    ValidationError,
)
from .landscape import (
    Landscape,
    PatchEnvironment,
    RegionLabel,
    SpeciesTraits,
    StrategyVector,
    classify_region,
    derive_jump_ratios,
    ifd_strategy,
    opposite_sides,
    recover_preferences,
    strict_dominates,
    weakly_dominates,
)
from .grid import Grid, PiecewiseField, build_grid, integrate_field
from .operators import LinearOperator, assemble_diffusion
from .transform import (
    TransformedProblem,
    pull_back,
    push_forward,
    solve_transformed_steady,
    to_transformed,
)
from .steady import MonotonicityReport, SteadyConfig, monotonicity_report, solve_resident_steady
from .eigen import (
    EigenPair,
    SIGN_TOL,
    assemble_linearization,
    invasion_fitness,
    principal_eigenpair,
    resident_self_eigenpair,
)
from .identities import (
    CoexistenceResiduals,
    coexistence_identity_residuals,
    invasion_identity_residual,
)
from .dynamics import (
    OutcomeRecord,
    SimConfig,
    Stepper,
    classify_outcome,
    order_preservation_check,
    simulate,
)
from .analysis import (
    CrossValidationReport,
    PIPGrid,
    Prediction,
    StrategyTestResult,
    cross_validate,
    css_check,
    ess_check,
    nis_check,
    pip,
    predict_outcome,
    stability_table,
)

__all__ = [
    "CoexistenceResiduals",
    "CrossValidationReport",
    "EigenPair",
    "EigenSolveError",
    "Grid",
    "GridResolutionError",
    "Landscape",
    "LinearOperator",
    "MonotonicityReport",
    "NumericalError",
    "OutcomeRecord",
    "PIPGrid",
    "PatchEnvironment",
    "PiecewiseField",
    "Prediction",
    "RegionLabel",
    "SIGN_TOL",
    "SimConfig",
    "SimulationBlowUpError",
    "SpeciesTraits",
    "SteadyConfig",
    "SteadyConvergenceError",
    "Stepper",
    "StrategyTestResult",
    "StrategyVector",
    "TransformedProblem",
    "ValidationError",
    "assemble_diffusion",
    "assemble_linearization",
    "build_grid",
    "classify_outcome",
    "classify_region",
    "coexistence_identity_residuals",
    "cross_validate",
    "css_check",
    "derive_jump_ratios",
    "ess_check",
    "ifd_strategy",
    "integrate_field",
    "invasion_fitness",
    "invasion_identity_residual",
    "monotonicity_report",
    "nis_check",
    "opposite_sides",
    "order_preservation_check",
    "pip",
    "predict_outcome",
    "principal_eigenpair",
    "pull_back",
    "push_forward",
    "recover_preferences",
    "resident_self_eigenpair",
    "simulate",
    "solve_resident_steady",
    "solve_transformed_steady",
    "stability_table",
    "strict_dominates",
    "to_transformed",
    "weakly_dominates",
]

__version__ = "0.1.0"

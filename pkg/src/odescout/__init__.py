"""odescout: relevance-guided parameter-space exploration for ODE features.

The package approximates an expensive scalar feature of a parametrized ODE
system (for example the peak of a limit cycle) over a parameter grid.  A
cheap relevance measure built from the vector field decides where the
feature must actually be computed and where a neighboring value can be
copied; the sparse result interpolates to the full box.
"""

from .convergence import (
    SYNTHETIC_TARGETS,
    ErrorReport,
    ErrorStudyConfig,
    LevelRecord,
    convergence_study,
    l1_error,
    mc_integral_estimate,
    pointwise_target,
)
from .cycles import CycleConfig, LimitCycle, find_limit_cycle, measure, sample_cycle_points
from .errors import (
    ConfigError,
    DegenerateAxisError,
    DimensionMismatchError,
    DomainViolationError,
    ExtrapolationError,
    HyperbolicDomainError,
    NoCycleError,
    OdescoutError,
    SingularInputError,
    SingularMatrixError,
)
from .exploration import (
    Counters,
    Entry,
    ExplorationConfig,
    ResultSet,
    run_deterministic_exploration,
    run_full,
    run_random_exploration,
)
from .grid import Box, Grid, GridPoint, build_grid, graph_distance, neighborhood
from .interpolation import InterpolatedField, SliceResult, interpolate_1d
from .models import (
    ModelInfo,
    OdeSystem,
    ParameterVector,
    available_models,
    budworm_model,
    get_model,
    register_model,
)
from .pipeline import RunRecord, execute_exploration, execute_full, run_and_store
from .relevance import (
    PhaseSample,
    RelevanceModel,
    RelevanceSettings,
    build_phase_sample,
    build_relevance_model,
    relevance_function,
    relevance_measure,
)
from .rosenbrock import SolverConfig, Trajectory, integrate, integrate_fixed_step
from .runconfig import (
    AxisSpec,
    RunConfig,
    build_run_grid,
    load_run_config,
    make_feature_evaluator,
    parse_run_config,
)
from .store import RunStore, StoredRun

__version__ = "0.1.0"

__all__ = [
    "AxisSpec",
    "Box",
    "ConfigError",
    "Counters",
    "CycleConfig",
    "DegenerateAxisError",
    "DimensionMismatchError",
    "DomainViolationError",
    "Entry",
    "ErrorReport",
    "ErrorStudyConfig",
    "ExplorationConfig",
    "ExtrapolationError",
    "Grid",
    "GridPoint",
    "HyperbolicDomainError",
    "InterpolatedField",
    "LevelRecord",
    "LimitCycle",
    "ModelInfo",
    "NoCycleError",
    "OdeSystem",
    "OdescoutError",
    "ParameterVector",
    "PhaseSample",
    "RelevanceModel",
    "RelevanceSettings",
    "ResultSet",
    "RunConfig",
    "RunRecord",
    "RunStore",
    "SYNTHETIC_TARGETS",
    "SingularInputError",
    "SingularMatrixError",
    "SliceResult",
    "SolverConfig",
    "StoredRun",
    "Trajectory",
    "available_models",
    "budworm_model",
    "build_grid",
    "build_phase_sample",
    "build_relevance_model",
    "build_run_grid",
    "convergence_study",
    "execute_exploration",
    "execute_full",
    "find_limit_cycle",
    "get_model",
    "graph_distance",
    "integrate",
    "integrate_fixed_step",
    "interpolate_1d",
    "l1_error",
    "load_run_config",
    "make_feature_evaluator",
    "mc_integral_estimate",
    "measure",
    "neighborhood",
    "parse_run_config",
    "pointwise_target",
    "register_model",
    "relevance_function",
    "relevance_measure",
    "run_and_store",
    "run_deterministic_exploration",
    "run_full",
    "run_random_exploration",
    "sample_cycle_points",
]

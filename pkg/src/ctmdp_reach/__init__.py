"""Time-bounded reachability in continuous-time Markov decision processes.

Certified lower/upper bounds via uniformisation and untimed analyses, an
extractable step-indexed scheduler, Monte Carlo validation, and benchmark
model generators.
"""

from .benchmarks import SjsParams, generate_grid_ctmc, generate_sjs
from .kernels import ENV_BACKEND, backend_name
from .model import (
    Ctmdp,
    GoalSpec,
    ModelFormatError,
    Query,
    dump_model,
    embedded_prob,
    enabled_actions,
    exit_rate,
    load_goal,
    load_model,
    max_exit_rate,
    model_to_dict,
    parse_goal,
    parse_model,
    validate,
)
from .poisson import PoissonTruncation, poisson_weights, truncation_depth
from .simulate import SimConfig, SimOutcome, simulate_baseline, simulate_scheduler
from .solver import (
    BoundsResult,
    LambdaCapExceeded,
    RoundStats,
    StepScheduler,
    frozen_lower_bound,
    gu_solve,
    lower_bound,
    result_to_dict,
    scheduler_to_dict,
    solve_value_and_policy,
    upper_bound,
)
from .uniformise import UniformisedModel, uniformise_early, uniformise_late

__version__ = "0.1.0"

__all__ = [
    "Ctmdp", "GoalSpec", "Query", "ModelFormatError",
    "validate", "enabled_actions", "exit_rate", "embedded_prob", "max_exit_rate",
    "parse_model", "load_model", "model_to_dict", "dump_model", "parse_goal", "load_goal",
    "UniformisedModel", "uniformise_late", "uniformise_early",
    "PoissonTruncation", "truncation_depth", "poisson_weights",
    "BoundsResult", "RoundStats", "StepScheduler", "LambdaCapExceeded",
    "lower_bound", "upper_bound", "frozen_lower_bound", "gu_solve",
    "solve_value_and_policy", "result_to_dict", "scheduler_to_dict",
    "SimConfig", "SimOutcome", "simulate_scheduler", "simulate_baseline",
    "SjsParams", "generate_sjs", "generate_grid_ctmc",
    "ENV_BACKEND", "backend_name",
    "__version__",
]

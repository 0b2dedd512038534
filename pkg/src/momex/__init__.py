"""Normalized stochastic gradient methods with multi-extrapolated momentum.

Submodules: schedule (per-iteration parameter rules and their closed
forms), problems (benchmark objectives, noise model, datasets), optimizer
(the step kernels and run loop), verify (independent oracles for every
identity and bound), harness (CLI and experiment plumbing).
"""

from .optimizer import (
    AlgorithmKind,
    OptimizerState,
    RunResult,
    TrajectoryRecord,
    mem,
    nigt,
    run,
    select_output_iterate,
    sg,
    sg_pm,
)
from .problems import (
    Dataset,
    DatasetFormatError,
    NoiseModel,
    ProblemConstants,
    Sample,
    SmoothProblem,
    datafit_problem,
    generate_synthetic,
    load_csv_dataset,
    quadratic_problem,
    robust_problem,
    save_dataset,
    stochastic_grad,
)
from .schedule import (
    IllConditionedSystem,
    IterationParams,
    ScheduleConfig,
    init_params,
    iteration_threshold,
    params_for,
    params_general,
    params_p3,
    potential_weight,
    solve_weights_closed_form,
    solve_weights_linear,
    theorem_constant,
    validate,
    weight_sum_closed_form,
)
from .verify import CheckReport
from .harness import ConfigError, RunConfig, compare, parse_config, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind",
    "CheckReport",
    "ConfigError",
    "Dataset",
    "DatasetFormatError",
    "IllConditionedSystem",
    "IterationParams",
    "NoiseModel",
    "OptimizerState",
    "ProblemConstants",
    "RunConfig",
    "RunResult",
    "Sample",
    "ScheduleConfig",
    "SmoothProblem",
    "TrajectoryRecord",
    "compare",
    "datafit_problem",
    "generate_synthetic",
    "init_params",
    "iteration_threshold",
    "load_csv_dataset",
    "mem",
    "nigt",
    "params_for",
    "params_general",
    "params_p3",
    "parse_config",
    "potential_weight",
    "quadratic_problem",
    "robust_problem",
    "run",
    "run_experiment",
    "save_dataset",
    "select_output_iterate",
    "sg",
    "sg_pm",
    "solve_weights_closed_form",
    "solve_weights_linear",
    "stochastic_grad",
    "theorem_constant",
    "validate",
    "weight_sum_closed_form",
    "__version__",
]

"""Optimizer update rules, inclusion checks and tuning-protocol studies."""

from ._core import (
    ConfigError,
    DivergenceError,
    OptimizerConfig,
    OptimizerState,
    Rule,
    Schedule,
    StudyResult,
    UnsupportedMapping,
    UsageError,
    __version__,
    bootstrap,
    check_inclusions,
    init_state,
    load_result,
    map_to_general,
    parse_rule,
    radical_inverse,
    run_study,
    sample_space,
    sample_unit,
    step,
    trajectory_divergence,
    validate_study,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]

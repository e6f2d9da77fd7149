"""Python bindings for the elaprobe C++ core."""

from ._core import (
    ElaProbeError,
    centered_l2_discrepancy,
    compute_features,
    evaluate,
    feature_names,
    featurize_rep,
    generate_design,
    run_experiment,
    scale_to_domain,
    strategies,
    validate,
)

__all__ = [
    "ElaProbeError",
    "centered_l2_discrepancy",
    "compute_features",
    "evaluate",
    "feature_names",
    "featurize_rep",
    "generate_design",
    "run_experiment",
    "scale_to_domain",
    "strategies",
    "validate",
]

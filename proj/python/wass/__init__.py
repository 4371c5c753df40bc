"""Class-weight selection by Wasserstein distance (Python bindings)."""

from ._core import (
    WassError,
    __version__,
    brute_force_class_weights,
    exact_ot,
    induced_error,
    largest_singular_value,
    make_scenario,
    pairwise_distances,
    run_pipeline,
    select_class_weights,
    sinkhorn_class_weights,
    softmax_lipschitz_constant,
    solve_class_weights,
    verify,
)

__all__ = [
    "WassError",
    "__version__",
    "brute_force_class_weights",
    "exact_ot",
    "induced_error",
    "largest_singular_value",
    "make_scenario",
    "pairwise_distances",
    "run_pipeline",
    "select_class_weights",
    "sinkhorn_class_weights",
    "softmax_lipschitz_constant",
    "solve_class_weights",
    "verify",
]

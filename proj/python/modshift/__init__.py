"""Model-privacy federated learning simulator.

Designed shifts on the agents' model differences drive the eavesdropper's
Fisher information matrix to singularity while the server compensates them
exactly through a one-scalar secret channel.
"""

from modshift._modshift import (  # noqa: F401
    ExperimentConfig,
    LocalDataset,
    ModShiftError,
    alpha,
    apply_shift,
    build_fim,
    closed_form_eigenvalues,
    det_via_mdl,
    free_term_hook,
    generate_data,
    global_loss,
    is_singular,
    local_descent,
    make_gamma,
    mdl_decomposition,
    mse_gradient,
    mse_loss,
    run_experiment,
    shift_matrix,
    shift_matrix_rank_deficiency,
    tamper_bound,
    tamper_test,
    validate_gamma,
)

__all__ = [
    "ExperimentConfig",
    "LocalDataset",
    "ModShiftError",
    "alpha",
    "apply_shift",
    "build_fim",
    "closed_form_eigenvalues",
    "det_via_mdl",
    "free_term_hook",
    "generate_data",
    "global_loss",
    "is_singular",
    "local_descent",
    "make_gamma",
    "mdl_decomposition",
    "mse_gradient",
    "mse_loss",
    "run_experiment",
    "shift_matrix",
    "shift_matrix_rank_deficiency",
    "tamper_bound",
    "tamper_test",
    "validate_gamma",
]

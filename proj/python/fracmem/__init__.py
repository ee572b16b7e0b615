"""Composite membrane optimisation with the integral fractional Laplacian."""

from ._core import (
    Configuration,
    DomainMask,
    FracOperator,
    ShapeSpec,
    SolverError,
    alpha_bar,
    asymmetry,
    assemble,
    b_operator,
    build_domain,
    kernel_constant,
    lambda_opt,
    optimize,
    pn_convert,
    pn_inverse,
    quadratic_form,
    radial_optimize,
    rearrange,
    run_command,
    smallest_eigenpair,
    steiner,
)

__all__ = [
    "Configuration",
    "DomainMask",
    "FracOperator",
    "ShapeSpec",
    "SolverError",
    "alpha_bar",
    "asymmetry",
    "assemble",
    "b_operator",
    "build_domain",
    "kernel_constant",
    "lambda_opt",
    "optimize",
    "pn_convert",
    "pn_inverse",
    "quadratic_form",
    "radial_optimize",
    "rearrange",
    "run_command",
    "smallest_eigenpair",
    "steiner",
]

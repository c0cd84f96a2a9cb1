"""Slow-fast McKean-Vlasov systems driven by Brownian and fractional noise."""

from ._mkvldp import (
    BlowUpError,
    DomainError,
    GenerationError,
    ResolutionError,
    UnsupportedBranch,
    covariance_rh,
    kernel_kh,
    kh_constant,
    kh_star,
    model_names,
    rare_event,
    rate_function,
    rh,
    rkhs_inner,
    rl_derivative,
    rl_integral,
    run_cli,
    sample_bm,
    sample_fbm,
    simulate,
    verify,
    wasserstein2,
)

__all__ = [
    "BlowUpError",
    "DomainError",
    "GenerationError",
    "ResolutionError",
    "UnsupportedBranch",
    "covariance_rh",
    "kernel_kh",
    "kh_constant",
    "kh_star",
    "model_names",
    "rare_event",
    "rate_function",
    "rh",
    "rkhs_inner",
    "rl_derivative",
    "rl_integral",
    "run_cli",
    "sample_bm",
    "sample_fbm",
    "simulate",
    "verify",
    "wasserstein2",
]

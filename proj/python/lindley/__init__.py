"""Exact laws of the Lindley process W_n = max(0, W_{n-1} + Z_n) with Laplace increments."""

from ._core import (
    DomainError,
    InvariantError,
    MixedDensity,
    RegimeError,
    average_run_length,
    density,
    density_chain,
    fet_cdf,
    fet_pmf,
    fet_regime,
    llr_params,
    log_mgf,
    mean_fet,
    position_regime,
    run_cli,
    run_length_pmf,
    simulate,
)

__all__ = [
    "DomainError",
    "InvariantError",
    "MixedDensity",
    "RegimeError",
    "average_run_length",
    "density",
    "density_chain",
    "fet_cdf",
    "fet_pmf",
    "fet_regime",
    "llr_params",
    "log_mgf",
    "mean_fet",
    "position_regime",
    "run_cli",
    "run_length_pmf",
    "simulate",
]

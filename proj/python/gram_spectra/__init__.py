"""Moments of extreme singular values and condition numbers of Gaussian designs."""

from ._gram_spectra import (
    __version__,
    bound,
    cg_solve,
    estimate_moment,
    exact_ridge_risk,
    expected_log_kappa_bound,
    gd_solve,
    inv_chisq_check,
    singular_values,
    spectral_summary,
    sweep_gamma,
)

__all__ = [
    "__version__",
    "bound",
    "cg_solve",
    "estimate_moment",
    "exact_ridge_risk",
    "expected_log_kappa_bound",
    "gd_solve",
    "inv_chisq_check",
    "singular_values",
    "spectral_summary",
    "sweep_gamma",
]

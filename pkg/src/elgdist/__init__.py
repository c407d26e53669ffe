"""Exponentiated Lindley geometric (ELG) lifetime distribution: evaluation,
sampling, moments, maximum likelihood (Newton-Raphson and EM) and model
comparison against Gamma, Weibull, Lindley-geometric and Lindley fits."""

from .distributions import (
    ElgParams,
    GammaParams,
    LgParams,
    LindleyParams,
    WeibullParams,
    elg_cdf,
    elg_hazard,
    elg_isf,
    elg_logpdf,
    elg_pdf,
    elg_quantile,
    elg_sample,
    elg_survival,
    quartiles,
)
from .estimation import (
    Dataset,
    FitOptions,
    FitResult,
    confidence_intervals,
    fit_mle_em,
    fit_mle_newton,
    log_likelihood,
    observed_information,
    score,
)
from .inference import compare_models, information_criteria, lr_test, lr_test_nested
from .moments import elg_mgf, elg_moment, summary_stats
from .special import ConvergenceError, DomainError, lambert_w_minus1

__version__ = "0.1.0"

__all__ = [
    "ElgParams", "GammaParams", "LgParams", "LindleyParams", "WeibullParams",
    "elg_cdf", "elg_hazard", "elg_isf", "elg_logpdf", "elg_pdf", "elg_quantile",
    "elg_sample", "elg_survival", "quartiles",
    "Dataset", "FitOptions", "FitResult", "confidence_intervals", "fit_mle_em",
    "fit_mle_newton", "log_likelihood", "observed_information", "score",
    "compare_models", "information_criteria", "lr_test", "lr_test_nested",
    "elg_mgf", "elg_moment", "summary_stats",
    "ConvergenceError", "DomainError", "lambert_w_minus1",
]

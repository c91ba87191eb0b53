"""Least-squares fitting for decay curves, relaxation rates, and spectra."""

from .leastsq import (
    COST_TOL,
    LAMBDA_LIMIT,
    MAX_ITERATIONS,
    STEP_TOL,
    FitResult,
    levenberg_fit,
)
from .models import (
    FWHM_TO_SIGMA,
    echo_decay,
    exp_recovery,
    gaussian_area,
    gaussian_derivative_sum,
    gaussian_sum,
    t1_rate,
)
from .routines import (
    ECHO_START_EXPONENTS,
    T2_EFFECTIVELY_INFINITE_MS,
    fit_echo_decay,
    fit_exp_recovery,
    fit_gaussian_lines,
    fit_t1_temperature,
    rabi_peak,
    subtract_linear_baseline,
    t2_effectively_infinite,
)

__all__ = [
    "COST_TOL",
    "ECHO_START_EXPONENTS",
    "FWHM_TO_SIGMA",
    "FitResult",
    "LAMBDA_LIMIT",
    "MAX_ITERATIONS",
    "STEP_TOL",
    "T2_EFFECTIVELY_INFINITE_MS",
    "echo_decay",
    "exp_recovery",
    "fit_echo_decay",
    "fit_exp_recovery",
    "fit_gaussian_lines",
    "fit_t1_temperature",
    "gaussian_area",
    "gaussian_derivative_sum",
    "gaussian_sum",
    "levenberg_fit",
    "rabi_peak",
    "subtract_linear_baseline",
    "t1_rate",
    "t2_effectively_infinite",
]

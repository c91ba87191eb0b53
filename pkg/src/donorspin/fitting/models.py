"""Model functions shared by the fit routines."""

from __future__ import annotations

import math

import numpy as np

FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def echo_decay(t_ms: np.ndarray, amp: float, t2_ms: float, ts_ms: float, n: float) -> np.ndarray:
    """amp * exp(-t/T2 - (t/TS)^n); the stretched term carries bath noise."""
    t = np.asarray(t_ms, dtype=float)
    return amp * np.exp(-t / t2_ms - (t / ts_ms) ** n)


def t1_rate(temp_k: np.ndarray, p: float, e: float, delta_k: float) -> np.ndarray:
    """Raman + Orbach relaxation rate P T^7 + E exp(-Delta/T), in 1/s."""
    temp = np.asarray(temp_k, dtype=float)
    return p * temp**7 + e * np.exp(-delta_k / temp)


def exp_recovery(t_ms: np.ndarray, m0: float, t1_ms: float, offset: float) -> np.ndarray:
    """Inversion recovery M0 (1 - 2 exp(-t/T1)) + offset."""
    t = np.asarray(t_ms, dtype=float)
    return m0 * (1.0 - 2.0 * np.exp(-t / t1_ms)) + offset


def gaussian_sum(
    x: np.ndarray, centers: np.ndarray, fwhms: np.ndarray, amps: np.ndarray
) -> np.ndarray:
    """Sum of Gaussians with peak amplitudes amps."""
    x = np.asarray(x, dtype=float)[:, None]
    sigma = np.asarray(fwhms, dtype=float)[None, :] * FWHM_TO_SIGMA
    z = (x - np.asarray(centers, dtype=float)[None, :]) / sigma
    return np.sum(np.asarray(amps, dtype=float)[None, :] * np.exp(-0.5 * z * z), axis=1)


def gaussian_derivative_sum(
    x: np.ndarray, centers: np.ndarray, fwhms: np.ndarray, amps: np.ndarray
) -> np.ndarray:
    """Field derivative of gaussian_sum with the same parameters."""
    x = np.asarray(x, dtype=float)[:, None]
    sigma = np.asarray(fwhms, dtype=float)[None, :] * FWHM_TO_SIGMA
    z = (x - np.asarray(centers, dtype=float)[None, :]) / sigma
    peaks = np.asarray(amps, dtype=float)[None, :] * np.exp(-0.5 * z * z)
    return np.sum(-z / sigma * peaks, axis=1)


def gaussian_area(amp: float, fwhm: float) -> float:
    """Analytic area of one Gaussian from peak amplitude and width."""
    return amp * fwhm * FWHM_TO_SIGMA * math.sqrt(2.0 * math.pi)

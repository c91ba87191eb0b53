"""Fit routines for echo decay, relaxation, lineshapes, and Rabi tones."""

from __future__ import annotations

import math

import numpy as np

from .leastsq import FitResult, build_result, levenberg_fit, standard_errors
from .models import (
    echo_decay,
    exp_recovery,
    gaussian_area,
    gaussian_derivative_sum,
    gaussian_sum,
    t1_rate,
)

ECHO_START_EXPONENTS = (1.5, 2.0, 2.5, 3.0, 3.5)
T2_EFFECTIVELY_INFINITE_MS = 1e6  # 1e3 s; fits beyond this are unbounded


def t2_effectively_infinite(result: FitResult) -> bool:
    """Whether the fitted exponential time exceeds the reporting cap."""
    return result.params["T2_ms"] > T2_EFFECTIVELY_INFINITE_MS


def _decay_time_guess(t: np.ndarray, amp: np.ndarray) -> float:
    """Time where the curve first drops below 1/e of its initial value."""
    below = np.flatnonzero(amp < amp[0] / math.e)
    if len(below) == 0:
        return 2.0 * t[-1]
    return max(float(t[below[0]]), float(t[1]))


def fit_echo_decay(
    times_ms: np.ndarray, amplitude: np.ndarray, free_amplitude: bool = True
) -> FitResult:
    """Fit amp * exp(-t/T2 - (t/TS)^n) to an echo decay.

    Multi-start over the stretch exponent (the cost surface is multimodal
    in n), plus one exponential-dominated start so the nested pure-exp
    limit is found exactly. T2 is fitted as a rate so an absent
    exponential channel sits at rate 0 instead of an unreachable large
    time; params report T2_ms = 1/rate (inf when the rate fits to 0).
    """
    t = np.asarray(times_ms, dtype=float)
    amp = np.asarray(amplitude, dtype=float)
    if len(t) < 6:
        raise ValueError("need at least 6 points")
    if np.any(amp <= 0):
        raise ValueError("echo amplitudes must be positive")

    ts_guess = _decay_time_guess(t, amp)
    amp_guess = float(amp[0])
    # n > 1 strictly, so a pure exponential is carried by the rate channel
    # alone and the stretched channel parks at its (unidentifiable) bound
    lo = np.array([0.0 if free_amplitude else 1.0, 0.0, 1e-6, 1.05])
    hi = np.array([1e6 if free_amplitude else 1.0, 1e3, 1e9, 6.0])
    if not free_amplitude:
        amp_guess = 1.0

    def residual(x):
        with np.errstate(over="ignore"):
            model = x[0] * np.exp(-x[1] * t - (t / x[2]) ** x[3])
        return model - amp

    starts = [np.array([amp_guess, 0.0, ts_guess, n0]) for n0 in ECHO_START_EXPONENTS]
    starts.append(np.array([amp_guess, 1.0 / ts_guess, 1e6 * ts_guess, 2.0]))
    starts = [np.clip(s, lo, hi) for s in starts]
    best = None
    for x0 in starts:
        solution = levenberg_fit(residual, x0, lo, hi)
        cost = solution.cost_history[-1]
        # best residual wins; the flag only breaks exact ties
        if best is None or (cost, not solution.converged) < (best[1], not best[0].converged):
            best = (solution, cost)
    solution = best[0]

    names = ["amp", "rate_per_ms", "TS_ms", "n"]
    errors = standard_errors(solution, names)
    amp_fit, rate, ts, n = solution.x
    params = {
        "amp": float(amp_fit),
        "T2_ms": float(1.0 / rate) if rate > 0 else math.inf,
        "TS_ms": float(ts),
        "n": float(n),
    }
    std_errors = {}
    if "amp" in errors and free_amplitude:
        std_errors["amp"] = errors["amp"]
    if "rate_per_ms" in errors and rate > 0 and 1.0 / rate <= T2_EFFECTIVELY_INFINITE_MS:
        std_errors["T2_ms"] = errors["rate_per_ms"] / rate**2
    if "TS_ms" in errors:
        std_errors["TS_ms"] = errors["TS_ms"]
    if "n" in errors:
        std_errors["n"] = errors["n"]
    return FitResult(
        params=params,
        std_errors=std_errors,
        residual_norm=float(np.linalg.norm(solution.residual)),
        converged=solution.converged,
        n_iterations=solution.n_iterations,
        cost_history=solution.cost_history,
    )


def _t1_linear_prescreen(temps, rates, delta_grid):
    """Best (P, E, Delta) over a Delta grid, with (P, E) solved linearly.

    Columns are normalized before the solve; raw T^7 and exp(-Delta/T)
    columns differ by enough orders of magnitude to trip rank cutoffs.
    """
    raman = temps**7
    best = None
    for delta in delta_grid:
        basis = np.column_stack([raman, np.exp(-delta / temps)])
        scale = np.linalg.norm(basis, axis=0)
        coef, *_ = np.linalg.lstsq(basis / scale, rates, rcond=None)
        coef = np.maximum(coef / scale, 0.0)
        cost = float(np.sum((basis @ coef - rates) ** 2))
        if best is None or cost < best[0]:
            best = (cost, float(coef[0]), float(coef[1]), float(delta))
    return best[1], best[2], best[3]


def fit_t1_temperature(
    temps_k: np.ndarray, rates_per_s: np.ndarray, delta_fixed_k: float | None = None
) -> FitResult:
    """Fit 1/T1 = P T^7 + E exp(-Delta/T); Delta optionally held fixed."""
    temps = np.asarray(temps_k, dtype=float)
    rates = np.asarray(rates_per_s, dtype=float)
    if len(temps) < 4:
        raise ValueError("need at least 4 points")
    if np.any(temps <= 0):
        raise ValueError("temperatures must be positive")

    if delta_fixed_k is not None:
        delta_grid = np.array([delta_fixed_k])
        p_guess, e_guess, delta_guess = _t1_linear_prescreen(temps, rates, delta_grid)
    else:
        coarse = np.geomspace(10.0, 5000.0, 60)
        _, _, delta_coarse = _t1_linear_prescreen(temps, rates, coarse)
        fine = np.linspace(0.8 * delta_coarse, 1.25 * delta_coarse, 41)
        p_guess, e_guess, delta_guess = _t1_linear_prescreen(temps, rates, fine)

    if delta_fixed_k is None:
        names = ["P", "E", "Delta_K"]
        lo = np.array([0.0, 0.0, 1.0])
        hi = np.array([1e30, 1e30, 1e4])
        x0 = np.array([p_guess, e_guess, delta_guess])

        def residual(x):
            return t1_rate(temps, x[0], x[1], x[2]) - rates

    else:
        names = ["P", "E"]
        lo = np.array([0.0, 0.0])
        hi = np.array([1e30, 1e30])
        x0 = np.array([p_guess, e_guess])

        def residual(x):
            return t1_rate(temps, x[0], x[1], delta_fixed_k) - rates

    solution = levenberg_fit(residual, x0, lo, hi)
    result = build_result(solution, names)
    if delta_fixed_k is not None:
        params = dict(result.params, Delta_K=float(delta_fixed_k))
        result = FitResult(
            params=params,
            std_errors=result.std_errors,
            residual_norm=result.residual_norm,
            converged=result.converged,
            n_iterations=result.n_iterations,
            cost_history=result.cost_history,
        )
    return result


def fit_exp_recovery(times_ms: np.ndarray, magnetization: np.ndarray) -> FitResult:
    """Fit inversion recovery M0 (1 - 2 exp(-t/T1)) + offset."""
    t = np.asarray(times_ms, dtype=float)
    m = np.asarray(magnetization, dtype=float)
    if len(t) < 4:
        raise ValueError("need at least 4 points")
    spread = float(np.ptp(m))
    if spread == 0.0:
        # saturated input: T1 carries no information
        return FitResult(
            params={"M0": 0.0, "T1_ms": math.nan, "offset": float(m[0])},
            std_errors={},
            residual_norm=0.0,
            converged=False,
            n_iterations=0,
            cost_history=(0.0,),
        )

    m0_guess = (float(m[-1]) - float(m[0])) / 2.0
    offset_guess = float(m[-1]) - m0_guess
    midpoint = offset_guess  # model crosses offset at t = T1 ln 2
    crossing = np.flatnonzero(np.sign(m - midpoint) != np.sign(m[0] - midpoint))
    t1_guess = float(t[crossing[0]]) / math.log(2.0) if len(crossing) else float(t[-1]) / 2.0
    t1_guess = max(t1_guess, float(t[1]))

    names = ["M0", "T1_ms", "offset"]
    lo = np.array([-1e12, 1e-9, -1e12])
    hi = np.array([1e12, 1e12, 1e12])

    def residual(x):
        return exp_recovery(t, x[0], x[1], x[2]) - m

    solution = levenberg_fit(residual, np.array([m0_guess, t1_guess, offset_guess]), lo, hi)
    return build_result(solution, names)


def _initial_lines(x_mt, signal, n_lines, fwhm_mt):
    """Peak-pick initial centers and amplitudes, masking found peaks."""
    work = signal.copy()
    centers, amps = [], []
    for _ in range(n_lines):
        k = int(np.argmax(np.abs(work)))
        centers.append(float(x_mt[k]))
        amps.append(float(work[k]))
        work[np.abs(x_mt - x_mt[k]) < 1.5 * fwhm_mt] = 0.0
    order = np.argsort(centers)
    return [centers[i] for i in order], [amps[i] for i in order]


def fit_gaussian_lines(
    field_grid_t: np.ndarray,
    signal: np.ndarray,
    n_lines: int,
    mode: str = "absorption",
    fwhm_init_mt: float = 0.7,
) -> FitResult:
    """Fit a sum of Gaussian lines (or their derivatives) to a spectrum.

    Initial centers come from the integrated curve in derivative mode.
    Per line the params carry center_i_mt, fwhm_i_mt, amp_i and the
    analytic area_i; heavily overlapping lines that leave the normal
    matrix ill-conditioned report converged = False.
    """
    if n_lines < 1:
        raise ValueError("need at least one line")
    if mode not in ("absorption", "derivative"):
        raise ValueError(f"unknown mode {mode!r}")
    x_mt = np.asarray(field_grid_t, dtype=float) * 1e3
    y = np.asarray(signal, dtype=float)

    if mode == "derivative":
        proxy = np.concatenate(([0.0], np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x_mt))))
    else:
        proxy = y
    centers, amps = _initial_lines(x_mt, proxy, n_lines, fwhm_init_mt)

    model_fn = gaussian_sum if mode == "absorption" else gaussian_derivative_sum

    def residual(x):
        return model_fn(x_mt, x[0::3], np.abs(x[1::3]), x[2::3]) - y

    x0 = np.empty(3 * n_lines)
    lo = np.empty(3 * n_lines)
    hi = np.empty(3 * n_lines)
    for i in range(n_lines):
        x0[3 * i : 3 * i + 3] = (centers[i], fwhm_init_mt, amps[i])
        lo[3 * i : 3 * i + 3] = (x_mt[0], 1e-4, -1e12)
        hi[3 * i : 3 * i + 3] = (x_mt[-1], x_mt[-1] - x_mt[0], 1e12)

    names = []
    for i in range(1, n_lines + 1):
        names += [f"center_{i}_mt", f"fwhm_{i}_mt", f"amp_{i}"]
    solution = levenberg_fit(residual, x0, lo, hi)

    normal = solution.jacobian.T @ solution.jacobian
    ill_conditioned = np.linalg.cond(normal) > 1e12
    converged = solution.converged and not ill_conditioned

    order = np.argsort(solution.x[0::3])
    params: dict[str, float] = {}
    std_errors_raw = standard_errors(solution, names) if converged else {}
    std_errors: dict[str, float] = {}
    for rank, i in enumerate(order, start=1):
        center, fwhm, amp = solution.x[3 * i : 3 * i + 3]
        params[f"center_{rank}_mt"] = float(center)
        params[f"fwhm_{rank}_mt"] = float(abs(fwhm))
        params[f"amp_{rank}"] = float(amp)
        params[f"area_{rank}"] = gaussian_area(float(amp), float(abs(fwhm)))
        renames = {
            f"center_{i + 1}_mt": f"center_{rank}_mt",
            f"fwhm_{i + 1}_mt": f"fwhm_{rank}_mt",
            f"amp_{i + 1}": f"amp_{rank}",
        }
        for old, new in renames.items():
            if old in std_errors_raw:
                std_errors[new] = std_errors_raw[old]
    return FitResult(
        params=params,
        std_errors=std_errors,
        residual_norm=float(np.linalg.norm(solution.residual)),
        converged=converged,
        n_iterations=solution.n_iterations,
        cost_history=solution.cost_history,
    )


def subtract_linear_baseline(
    x: np.ndarray, y: np.ndarray, windows: list[tuple[float, float]]
) -> np.ndarray:
    """Remove the least-squares line fitted over the baseline windows."""
    if len(x) < 3:
        raise ValueError("need at least 3 points")
    if not windows:
        raise ValueError("baseline windows must be non-empty")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.zeros(len(x), dtype=bool)
    for lo, hi in windows:
        mask |= (x >= lo) & (x <= hi)
    if np.sum(mask) < 2:
        raise ValueError("baseline windows select fewer than 2 points")
    slope, intercept = np.polyfit(x[mask], y[mask], 1)
    return y - (slope * x + intercept)


def rabi_peak(times_us: np.ndarray, signal: np.ndarray) -> float:
    """Dominant oscillation frequency (MHz) of a uniformly sampled signal.

    Magnitude spectrum with mean removal and 4x zero padding; the peak
    bin is refined by 3-point parabolic interpolation.
    """
    t = np.asarray(times_us, dtype=float)
    y = np.asarray(signal, dtype=float)
    if len(t) < 16:
        raise ValueError("need at least 16 samples")
    dt = np.diff(t)
    if np.max(np.abs(dt - dt[0])) > 1e-9 * abs(dt[0]):
        raise ValueError("sampling must be uniform")
    centered = y - np.mean(y)
    if np.max(np.abs(centered)) == 0.0:
        raise ValueError("flat signal has no peak")
    n_fft = 4 * len(y)
    spectrum = np.abs(np.fft.rfft(centered, n=n_fft))
    k = int(np.argmax(spectrum[1:])) + 1
    if 1 <= k < len(spectrum) - 1:
        alpha, beta, gamma = spectrum[k - 1 : k + 2]
        denom = alpha - 2 * beta + gamma
        shift = 0.5 * (alpha - gamma) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    return (k + shift) / (n_fft * float(dt[0]))

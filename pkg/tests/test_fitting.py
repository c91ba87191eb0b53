"""Tests for the least-squares solver, models, and fit routines."""

import math

import numpy as np
import pytest

from donorspin import si_bi
from donorspin.fitting import (
    FWHM_TO_SIGMA,
    echo_decay,
    exp_recovery,
    fit_echo_decay,
    fit_exp_recovery,
    fit_gaussian_lines,
    fit_t1_temperature,
    gaussian_area,
    gaussian_derivative_sum,
    gaussian_sum,
    rabi_peak,
    subtract_linear_baseline,
    t1_rate,
    t2_effectively_infinite,
)
from donorspin.fitting.leastsq import _numeric_jacobian
from donorspin.spectra import find_all_resonances, synthesize_spectrum

TIMES = np.linspace(0.0, 2.0, 80)


def test_echo_decay_round_trip():
    data = echo_decay(TIMES, 0.97, 5.0, 0.3, 2.3)
    result = fit_echo_decay(TIMES, data)
    assert result.converged
    for key, want in [("amp", 0.97), ("T2_ms", 5.0), ("TS_ms", 0.3), ("n", 2.3)]:
        assert result.params[key] == pytest.approx(want, rel=1e-2)
    assert result.residual_norm < 1e-8
    for key in ("amp", "T2_ms", "TS_ms", "n"):
        assert key in result.std_errors


def test_echo_decay_pure_exponential():
    data = np.exp(-TIMES / 5.0)
    result = fit_echo_decay(TIMES, data)
    assert result.converged
    assert result.params["T2_ms"] == pytest.approx(5.0, rel=1e-2)
    assert not t2_effectively_infinite(result)
    # stretched channel is suppressed: no error bars on its parameters
    assert "TS_ms" not in result.std_errors
    assert "n" not in result.std_errors


def test_echo_decay_stretched_only():
    data = np.exp(-((TIMES / 0.3) ** 2.27))
    result = fit_echo_decay(TIMES, data)
    assert result.converged
    assert t2_effectively_infinite(result)
    assert result.params["TS_ms"] == pytest.approx(0.3, rel=1e-2)
    assert result.params["n"] == pytest.approx(2.27, rel=1e-2)
    assert "T2_ms" not in result.std_errors


def test_echo_decay_scale_equivariance():
    data = echo_decay(TIMES, 0.97, 5.0, 0.3, 2.3)
    base = fit_echo_decay(TIMES, data)
    scaled = fit_echo_decay(TIMES, 2.5 * data)
    for key in ("T2_ms", "TS_ms", "n"):
        assert scaled.params[key] == pytest.approx(base.params[key], rel=1e-6)
    assert scaled.params["amp"] == pytest.approx(2.5 * base.params["amp"], rel=1e-6)


def test_echo_decay_fixed_amplitude():
    data = echo_decay(TIMES, 1.0, 5.0, 0.3, 2.3)
    result = fit_echo_decay(TIMES, data, free_amplitude=False)
    assert result.converged
    assert result.params["amp"] == 1.0
    assert "amp" not in result.std_errors
    assert result.params["TS_ms"] == pytest.approx(0.3, rel=1e-2)
    assert result.params["n"] == pytest.approx(2.3, rel=1e-2)


def test_echo_decay_validation():
    with pytest.raises(ValueError):
        fit_echo_decay(TIMES[:4], np.ones(4))
    bad = np.ones(len(TIMES))
    bad[3] = -0.1
    with pytest.raises(ValueError):
        fit_echo_decay(TIMES, bad)


def test_echo_decay_cost_history_monotone():
    data = echo_decay(TIMES, 0.97, 5.0, 0.3, 2.3)
    result = fit_echo_decay(TIMES, data)
    history = result.cost_history
    assert all(b <= a * (1 + 1e-12) for a, b in zip(history, history[1:]))


def test_t1_rate_value():
    # 2.7e-6 * 42^7 + 4e6 * exp(-113/42), evaluated independently
    want = 2.7e-6 * 230539333248.0 + 4e6 * math.exp(-113.0 / 42.0)
    assert want == pytest.approx(893850.6910093914, rel=1e-12)
    assert t1_rate(42.0, 2.7e-6, 4e6, 113.0) == pytest.approx(want, rel=1e-12)


def test_t1_round_trip_free_delta():
    temps = np.linspace(10.0, 60.0, 14)
    rates = t1_rate(temps, 2.7e-6, 4e6, 113.0)
    result = fit_t1_temperature(temps, rates)
    assert result.converged
    assert result.params["P"] == pytest.approx(2.7e-6, rel=1e-2)
    assert result.params["E"] == pytest.approx(4e6, rel=1e-2)
    assert result.params["Delta_K"] == pytest.approx(113.0, rel=1e-2)
    assert "P" in result.std_errors


def test_t1_round_trip_fixed_delta():
    temps = np.linspace(10.0, 60.0, 14)
    rates = t1_rate(temps, 1.26e-5, 3e12, 500.0)
    result = fit_t1_temperature(temps, rates, delta_fixed_k=500.0)
    assert result.converged
    assert result.params["P"] == pytest.approx(1.26e-5, rel=1e-3)
    assert result.params["E"] == pytest.approx(3e12, rel=1e-3)
    assert result.params["Delta_K"] == 500.0
    assert "Delta_K" not in result.std_errors


def test_t1_no_orbach_component():
    temps = np.linspace(10.0, 60.0, 14)
    rates = t1_rate(temps, 2.7e-6, 0.0, 113.0)
    result = fit_t1_temperature(temps, rates)
    assert result.converged
    assert result.params["P"] == pytest.approx(2.7e-6, rel=1e-2)
    # Orbach channel absent: its barrier carries no information
    assert "Delta_K" not in result.std_errors
    orbach_peak = result.params["E"] * math.exp(-result.params["Delta_K"] / temps.max())
    assert orbach_peak < 1e-6 * rates.max()


def test_t1_validation():
    with pytest.raises(ValueError):
        fit_t1_temperature(np.array([10.0, 20.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        fit_t1_temperature(np.array([-1.0, 10.0, 20.0, 30.0]), np.ones(4))


def test_exp_recovery_round_trip():
    t = np.linspace(0.0, 60.0, 40)
    data = exp_recovery(t, 0.9, 9.0, 0.05)
    result = fit_exp_recovery(t, data)
    assert result.converged
    assert result.params["M0"] == pytest.approx(0.9, rel=1e-3)
    assert result.params["T1_ms"] == pytest.approx(9.0, rel=1e-3)
    assert result.params["offset"] == pytest.approx(0.05, abs=1e-6)


def test_exp_recovery_saturated():
    t = np.linspace(0.0, 60.0, 40)
    result = fit_exp_recovery(t, np.full_like(t, 0.3))
    assert not result.converged
    assert result.std_errors == {}
    assert math.isnan(result.params["T1_ms"])


def test_numeric_jacobian_matches_analytic():
    t = np.linspace(0.0, 60.0, 40)
    data = exp_recovery(t, 0.9, 9.0, 0.05)

    def residual(x):
        return exp_recovery(t, x[0], x[1], x[2]) - data

    x = np.array([0.8, 11.0, 0.02])
    jac = _numeric_jacobian(residual, x, np.full(3, -np.inf), np.full(3, np.inf))
    decay = np.exp(-t / x[1])
    analytic = np.column_stack(
        [1.0 - 2.0 * decay, -2.0 * x[0] * decay * t / x[1] ** 2, np.ones_like(t)]
    )
    assert np.allclose(jac, analytic, rtol=1e-6, atol=1e-8)


def test_std_error_calibration():
    t = np.linspace(0.0, 60.0, 40)
    truth = {"M0": 0.9, "T1_ms": 9.0, "offset": 0.05}
    clean = exp_recovery(t, 0.9, 9.0, 0.05)
    rng = np.random.default_rng(7)
    hits = 0
    trials = 200
    for _ in range(trials):
        result = fit_exp_recovery(t, clean + rng.normal(0.0, 0.01, len(t)))
        if not result.converged:
            continue
        ok = all(
            abs(result.params[key] - truth[key]) <= 3.0 * result.std_errors[key]
            for key in truth
        )
        hits += ok
    assert hits >= 0.95 * trials


def test_gaussian_area_formula():
    # peak amplitude a, fwhm w: area = a * w * sqrt(2 pi) / (2 sqrt(2 ln 2))
    assert gaussian_area(1.0, 0.7) == pytest.approx(
        0.7 * math.sqrt(2.0 * math.pi) / (2.0 * math.sqrt(2.0 * math.log(2.0))),
        rel=1e-12,
    )
    sigma = 0.7 * FWHM_TO_SIGMA
    x = np.linspace(-10.0, 10.0, 20001)
    numeric = np.trapezoid(np.exp(-0.5 * (x / sigma) ** 2), x)
    assert gaussian_area(1.0, 0.7) == pytest.approx(numeric, rel=1e-9)


def test_gaussian_round_trip_absorption():
    grid = np.linspace(0.340, 0.352, 1200)
    signal = gaussian_sum(grid * 1e3, [344.0, 348.5], [0.7, 0.65], [1.0, 0.83])
    result = fit_gaussian_lines(grid, signal, n_lines=2, mode="absorption")
    assert result.converged
    assert result.params["center_1_mt"] == pytest.approx(344.0, abs=1e-4)
    assert result.params["center_2_mt"] == pytest.approx(348.5, abs=1e-4)
    assert result.params["fwhm_1_mt"] == pytest.approx(0.7, rel=1e-3)
    assert result.params["fwhm_2_mt"] == pytest.approx(0.65, rel=1e-3)
    assert result.params["amp_1"] == pytest.approx(1.0, rel=1e-3)
    assert result.params["area_1"] == pytest.approx(gaussian_area(1.0, 0.7), rel=1e-3)
    assert result.params["area_2"] == pytest.approx(gaussian_area(0.83, 0.65), rel=1e-3)


def test_gaussian_round_trip_derivative():
    grid = np.linspace(0.340, 0.352, 1200)
    signal = gaussian_derivative_sum(grid * 1e3, [344.0, 348.5], [0.7, 0.7], [1.0, 0.83])
    result = fit_gaussian_lines(grid, signal, n_lines=2, mode="derivative")
    assert result.converged
    assert result.params["center_1_mt"] == pytest.approx(344.0, abs=1e-4)
    assert result.params["center_2_mt"] == pytest.approx(348.5, abs=1e-4)
    assert result.params["amp_2"] == pytest.approx(0.83, rel=1e-3)


def test_gaussian_overlapping_lines_not_identifiable():
    grid = np.linspace(0.340, 0.352, 1200)
    signal = gaussian_sum(grid * 1e3, [346.0, 346.02], [0.7, 0.7], [1.0, 0.8])
    result = fit_gaussian_lines(grid, signal, n_lines=2, mode="absorption")
    assert not result.converged


def test_gaussian_separated_line_locality():
    grid = np.linspace(0.340, 0.352, 1200)
    signal = gaussian_sum(grid * 1e3, [344.0, 348.5], [0.7, 0.7], [1.0, 0.83])
    pair = fit_gaussian_lines(grid, signal, n_lines=2, mode="absorption")
    window = grid < 0.3462
    single = fit_gaussian_lines(grid[window], signal[window], n_lines=1, mode="absorption")
    assert single.params["center_1_mt"] == pytest.approx(pair.params["center_1_mt"], abs=1e-6)
    assert single.params["fwhm_1_mt"] == pytest.approx(pair.params["fwhm_1_mt"], rel=1e-6)
    assert single.params["amp_1"] == pytest.approx(pair.params["amp_1"], rel=1e-6)


def test_gaussian_fit_of_synthesized_spectrum():
    system = si_bi()
    transitions = find_all_resonances(system, 4044.0, (0.0, 0.6), intensity_floor=1e-4)
    assert len(transitions) == 2
    grid = np.arange(0.120, 0.371, 5e-5)
    spectrum = synthesize_spectrum(transitions, 0.7, "absorption", grid)
    result = fit_gaussian_lines(grid, spectrum.signal, n_lines=2, mode="absorption")
    assert result.converged
    assert result.params["fwhm_1_mt"] == pytest.approx(0.70, abs=0.01)
    assert result.params["fwhm_2_mt"] == pytest.approx(0.70, abs=0.01)
    ratio = result.params["area_2"] / result.params["area_1"]
    assert ratio == pytest.approx(1.2, abs=0.05)
    by_field = sorted(transitions, key=lambda tr: tr.field_b)
    assert ratio == pytest.approx(by_field[1].intensity / by_field[0].intensity, rel=0.02)


def test_gaussian_validation():
    grid = np.linspace(0.340, 0.352, 100)
    with pytest.raises(ValueError):
        fit_gaussian_lines(grid, np.zeros(100), n_lines=0)
    with pytest.raises(ValueError):
        fit_gaussian_lines(grid, np.zeros(100), n_lines=1, mode="dispersion")


def test_baseline_pure_line_is_zeroed():
    x = np.linspace(0.0, 10.0, 300)
    y = 0.7 * x + 2.0
    out = subtract_linear_baseline(x, y, [(0.0, 10.0)])
    assert np.max(np.abs(out)) < 1e-12 * np.max(np.abs(y))


def test_baseline_constant_is_zeroed():
    x = np.linspace(0.0, 10.0, 300)
    out = subtract_linear_baseline(x, np.full_like(x, 4.2), [(0.0, 3.0)])
    assert np.max(np.abs(out)) < 1e-12


def test_baseline_preserves_line_shape():
    x = np.linspace(0.0, 10.0, 300)
    bump = np.exp(-((x - 5.0) ** 2) / 0.08)
    y = 0.7 * x + 2.0 + bump
    out = subtract_linear_baseline(x, y, [(0.0, 2.0), (8.0, 10.0)])
    assert np.allclose(out, bump, atol=1e-6)


def test_baseline_validation():
    x = np.linspace(0.0, 10.0, 300)
    with pytest.raises(ValueError):
        subtract_linear_baseline(x, x, [])
    with pytest.raises(ValueError):
        subtract_linear_baseline(x, x, [(20.0, 30.0)])


def test_rabi_peak_frequency():
    t = np.arange(0.0, 1.0, 1.0 / 256.0)
    signal = 0.5 + 0.5 * np.cos(2.0 * np.pi * 15.625 * t)
    assert rabi_peak(t, signal) == pytest.approx(15.625, abs=0.05)


def test_rabi_peak_ratio():
    t = np.arange(0.0, 1.0, 1.0 / 256.0)
    f_low = rabi_peak(t, np.cos(2.0 * np.pi * 15.625 * t))
    f_high = rabi_peak(t, np.cos(2.0 * np.pi * 15.625 * 1.1 * t))
    assert f_high / f_low == pytest.approx(1.1, abs=0.02)


def test_rabi_peak_dc_invariance():
    t = np.arange(0.0, 1.0, 1.0 / 256.0)
    signal = 0.5 + 0.5 * np.cos(2.0 * np.pi * 15.625 * t)
    assert rabi_peak(t, signal + 3.0) == rabi_peak(t, signal)


def test_rabi_peak_validation():
    t = np.arange(0.0, 1.0, 1.0 / 256.0)
    with pytest.raises(ValueError):
        rabi_peak(t[:8], np.cos(t[:8]))
    with pytest.raises(ValueError):
        rabi_peak(t, np.full_like(t, 0.5))
    nonuniform = t.copy()
    nonuniform[10] += 1e-3
    with pytest.raises(ValueError):
        rabi_peak(nonuniform, np.cos(2.0 * np.pi * 15.625 * nonuniform))

"""Ensemble averaging, seeding, and convergence bookkeeping."""

import dataclasses

import numpy as np
import pytest

from donorspin import diagonalize, expectation_sz, si_bi
from donorspin.bath import (
    CceParams,
    LatticeSpec,
    build_configuration,
    cce2_echo,
    convergence_study,
    ensemble_echo,
    occupy,
    generate_lattice,
)

TIMES = tuple(np.linspace(0.0, 1.0, 21))


def _params(**overrides):
    base = dict(
        transition=(11, 10),
        field_b=0.3446,
        lattice=LatticeSpec(side_nm=7.0),
        time_grid_ms=TIMES,
        n_configs=4,
        seed=77,
    )
    base.update(overrides)
    return CceParams(**base)


def test_single_config_mean_and_zero_std():
    params = _params(n_configs=1)
    curve = ensemble_echo(params)
    config = build_configuration(params, 0)
    es = diagonalize(params.system, params.field_b)
    single = cce2_echo(
        config,
        expectation_sz(es, 11),
        expectation_sz(es, 10),
        np.asarray(TIMES),
        -8.4655 * params.field_b,
    )
    assert np.array_equal(curve.amplitude, single.amplitude)
    assert np.all(curve.std_of_mean == 0.0)


def test_configs_are_seeded_sequentially():
    params = _params()
    sites = generate_lattice(params.lattice)
    direct = occupy(sites, params.abundance, params.seed + 2, params.lattice.a0_nm)
    built = build_configuration(params, 2)
    assert np.array_equal(direct.positions, built.positions)
    assert built.seed == params.seed + 2


def test_determinism_and_worker_independence():
    params = _params()
    a = ensemble_echo(params, workers=1)
    b = ensemble_echo(params, workers=1)
    c = ensemble_echo(params, workers=2)
    assert np.array_equal(a.amplitude, b.amplitude)
    assert np.array_equal(a.amplitude, c.amplitude)
    assert np.array_equal(a.std_of_mean, c.std_of_mean)


def test_ensemble_curve_shape():
    curve = ensemble_echo(_params())
    assert curve.amplitude[0] == pytest.approx(1.0, abs=1e-9)
    assert np.all(curve.amplitude <= 1.0 + 1e-9)
    assert np.all(curve.amplitude >= 0.0)
    assert np.all(curve.std_of_mean >= 0.0)
    # even a small 7 nm cube of natural silicon visibly decoheres this
    # transition within a millisecond
    assert curve.amplitude[-1] < 0.8


def test_built_configuration_is_consistent():
    params = _params()
    config = build_configuration(params, 0)
    assert config.couplings_j.shape == (len(config.positions),)
    assert config.pair_b.shape == (len(config.pair_indices),)
    d = np.linalg.norm(
        config.positions[config.pair_indices[:, 0]]
        - config.positions[config.pair_indices[:, 1]],
        axis=1,
    )
    assert np.all(d**2 <= params.pair_cutoff_nm**2 + 1e-9)


def test_convergence_study_bookkeeping():
    params = _params(n_configs=2)
    sides = [2.2, 3.3]
    r2 = np.sqrt(2.0) / 2.0 * 0.543
    result = convergence_study(params, sides, [r2], workers=1)
    assert set(result.curves) == {(2.2, r2), (3.3, r2)}
    assert len(result.distances[r2]) == 1
    again = convergence_study(params, sides, [r2], workers=1)
    for key, curve in result.curves.items():
        assert np.array_equal(curve.amplitude, again.curves[key].amplitude)
    assert result.distances == again.distances
    with pytest.raises(ValueError):
        convergence_study(params, [], [r2])


def test_params_validation():
    with pytest.raises(ValueError):
        _params(n_configs=0)
    with pytest.raises(ValueError):
        _params(field_b=-1.0)
    with pytest.raises(ValueError):
        _params(time_grid_ms=(0.5, 1.0))
    with pytest.raises(ValueError):
        _params(r_max_nm=-0.4)
    # default cutoff is the 3rd-neighbor distance
    assert _params().pair_cutoff_nm == pytest.approx(0.543 * np.sqrt(11.0) / 4.0)


def test_stretched_level_has_exact_sz():
    es = diagonalize(si_bi(), 0.3446)
    assert expectation_sz(es, 10) == pytest.approx(-0.5, abs=1e-12)

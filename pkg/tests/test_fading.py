import math

import numpy as np
import pytest

from ntn_nbiot.fading import (
    ENSEMBLE_BLOCK,
    FadingModelSpec,
    InsufficientEnsembleError,
    draw_ensemble,
    draw_realization,
    estimated_k_factor,
    ncu,
    ndh,
    tap_cross_correlation,
    tap_power_db,
)

N = 100_000


def test_model_parameters():
    assert ncu().tap_delays == (0.0, 1481.0) and ncu().tap_gains == (-10.6, -23.4)
    assert ndh().tap_delays == (0.0, 168.0, 2199.0) and ndh().tap_gains == (-11.99, -9.89, -16.77)
    assert ncu().k_factor == ndh().k_factor == 7.0


def test_k_in_db_switch():
    assert ncu(7.0, k_in_db=True).k_factor == pytest.approx(10 ** 0.7)


@pytest.mark.parametrize(
    "delays, gains",
    [((10.0, 20.0), (-1.0, -2.0)), ((0.0, 0.0), (-1.0, -2.0)), ((0.0,), (-1.0, -2.0))],
)
def test_spec_validation(delays, gains):
    with pytest.raises(ValueError):
        FadingModelSpec("x", delays, gains)


def test_same_seed_same_taps():
    a = draw_realization(ndh(), 123)
    b = draw_realization(ndh(), 123)
    assert np.array_equal(a.taps, b.taps)
    assert len(a.taps) == 3
    assert not np.array_equal(a.taps, draw_realization(ndh(), 124).taps)


def test_pure_los_limit():
    spec = ncu(k_factor=math.inf)
    r = draw_realization(spec, 7)
    assert abs(r.taps[0]) == pytest.approx(math.sqrt(10 ** (-10.6 / 10)), abs=1e-15)
    assert r.taps[0].imag == 0.0


def test_ensemble_blocks_are_reproducible():
    spec = ncu()
    full = draw_ensemble(spec, ENSEMBLE_BLOCK + 10, seed=5)
    head = draw_ensemble(spec, ENSEMBLE_BLOCK, seed=5)
    assert np.array_equal(full[:ENSEMBLE_BLOCK], head)
    assert draw_ensemble(spec, 0, seed=5).shape == (0, 2)


@pytest.fixture(scope="module", params=["NCU", "NDH"])
def ensemble(request):
    spec = ncu() if request.param == "NCU" else ndh()
    return spec, draw_ensemble(spec, N, seed=2021)


def test_mean_tap_power(ensemble):
    spec, ens = ensemble
    np.testing.assert_allclose(tap_power_db(ens), spec.tap_gains, atol=0.5)


def test_total_power(ensemble):
    spec, ens = ensemble
    total = 10 * np.log10(np.mean(np.sum(np.abs(ens) ** 2, axis=1)))
    assert total == pytest.approx(spec.total_power_db, abs=0.3)


def test_taps_uncorrelated(ensemble):
    _, ens = ensemble
    corr = tap_cross_correlation(ens)
    off = corr[~np.eye(len(corr), dtype=bool)]
    assert np.all(off < 0.02)


def test_k_estimate(ensemble):
    _, ens = ensemble
    est = estimated_k_factor(ens[:, 0])
    assert 6.3 <= est.k <= 7.7
    assert not est.capped
    assert 0 < est.stderr < 0.3
    # batch-means error should be of the same order as the delta-method value sqrt((2K + K^2) / n)
    assert est.stderr < 10 * math.sqrt((2 * 7 + 49) / N)


def test_rayleigh_k_near_zero():
    # sqrt(mean^2 - var) of an exponential sample is ~ (8/n)^(1/4) of the mean,
    # so the power-moment estimate sits near 0.1 rather than at 0 for n = 1e5
    for seed in range(5):
        ens = draw_ensemble(ncu(k_factor=0.0), N, seed=seed)
        assert estimated_k_factor(ens[:, 0]).k < 0.25


def test_pure_los_k_capped():
    ens = draw_ensemble(ncu(k_factor=math.inf), 20_000, seed=3)
    est = estimated_k_factor(ens[:, 0])
    assert est.capped


def test_k_needs_enough_samples():
    with pytest.raises(InsufficientEnsembleError):
        estimated_k_factor(np.ones(100))

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ntn_nbiot.link_budget import (
    BANDWIDTHS,
    AntennaPattern,
    LinkParams,
    PathLossModel,
    link_budget_profile,
    noise_power,
    path_loss,
    satellite_antenna_gain,
)
from ntn_nbiot.orbit import PassScenario, pass_geometry

NARROWBAND_GAIN = 10 * math.log10(48)


def test_table_defaults():
    p = LinkParams()
    assert (p.nf_ue, p.nf_sat, p.g_shadow, p.g_polar, p.g_absorb, p.g_scint) == (-9, -3, -3, -3, -0.1, -2.2)
    assert (p.p_tx_dl, p.p_tx_ul, p.T_noise) == (39.0, 23.0, 290.0)
    assert p.pathloss_model is PathLossModel.FREE_SPACE


@pytest.mark.parametrize("bw, expected", [(180e3, -121.4), (3750, -138.2)])
def test_noise_power(bw, expected):
    assert noise_power(290, bw) == pytest.approx(expected, abs=0.05)


def test_noise_difference_between_allocations():
    assert noise_power(290, 180e3) - noise_power(290, 3750) == pytest.approx(NARROWBAND_GAIN, abs=1e-12)
    assert NARROWBAND_GAIN == pytest.approx(16.81, abs=0.005)


def test_noise_strictly_increasing():
    values = [noise_power(290, bw) for bw in BANDWIDTHS]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_noise_rejects_bad_temperature():
    with pytest.raises(ValueError):
        noise_power(0, 180e3)


def test_free_space_600km():
    assert path_loss(600e3, 2e9) == pytest.approx(-154.0, abs=0.1)


def test_free_space_doubling():
    assert path_loss(600e3, 2e9) - path_loss(1200e3, 2e9) == pytest.approx(20 * math.log10(2), abs=1e-12)


def test_paper_exponent_mode():
    params = LinkParams(pathloss_model="paper_exponent", pathloss_exponent=2.0)
    assert path_loss(600e3, 2e9, params) == pytest.approx(-115.56, abs=0.01)


def test_path_loss_rejects_zero_distance():
    with pytest.raises(ValueError):
        path_loss(0.0, 2e9)


@pytest.mark.parametrize("beta, expected", [(0.0, 8.48), (36.7, 5.48), (73.4, -3.52)])
def test_antenna_gain_points(beta, expected):
    assert satellite_antenna_gain(beta) == pytest.approx(expected, abs=1e-12)


def test_antenna_floor():
    pattern = AntennaPattern()
    assert satellite_antenna_gain(90.0, pattern) >= pattern.g_peak - 30.0
    assert satellite_antenna_gain(89.0, AntennaPattern(theta_3db=20.0)) == pytest.approx(8.48 - 30.0)


@pytest.fixture(scope="module")
def budgets():
    out = {}
    for a in (90.0, 62.4, 42.7, 30.0):
        g = pass_geometry(PassScenario(alpha_max=a, alpha_min=10.0, sample_step=0.5))
        out[a] = (g, link_budget_profile(g))
    return out


def test_ul_dl_gap_is_constant(budgets):
    for g, lb in budgets.values():
        gap = lb.snr_ul[3750] - lb.snr_dl
        assert np.ptp(gap) < 1e-9
        assert gap[0] == pytest.approx((23 - 39) + NARROWBAND_GAIN + (9 - 3), abs=1e-9)
        assert gap[0] == pytest.approx(6.8, abs=0.05)


def test_narrowband_gain_at_every_sample(budgets):
    for g, lb in budgets.values():
        np.testing.assert_allclose(lb.snr_ul[3750] - lb.snr_ul[180_000], NARROWBAND_GAIN, atol=1e-9)


def test_snr_peaks_at_closest_approach(budgets):
    g, lb = budgets[90.0]
    assert np.argmax(lb.snr_dl) == len(lb) // 2


def test_three_db_contour():
    pattern = AntennaPattern()
    assert satellite_antenna_gain(0.0, pattern) - satellite_antenna_gain(pattern.theta_3db / 2, pattern) == pytest.approx(3.0, abs=1e-12)


def test_overhead_regression_anchor(budgets):
    # hand evaluation: 39 + 8.48 - 154.0314 - 3 - 3 - 0.1 - 2.2 - 9 + 121.4225
    g, lb = budgets[90.0]
    mid = len(lb) // 2
    assert lb.snr_dl[mid] == pytest.approx(-2.428946, abs=1e-6)
    assert lb.snr_ul[3750][mid] == pytest.approx(4.383466, abs=1e-6)


def test_pathloss_model_does_not_move_argmax(budgets):
    for g, lb in budgets.values():
        alt = link_budget_profile(g, LinkParams(pathloss_model=PathLossModel.PAPER_EXPONENT))
        assert np.argmax(alt.snr_dl) == np.argmax(lb.snr_dl)
        assert abs(alt.snr_dl[0] - lb.snr_dl[0]) > 1.0


def test_ue_antenna_gain_applies_in_window():
    g = pass_geometry(PassScenario(alpha_max=90.0, alpha_min=30.0, sample_step=1.0))
    base = link_budget_profile(g)
    boosted = link_budget_profile(g, LinkParams(g_ue_ant=2.0))
    np.testing.assert_allclose(boosted.snr_dl - base.snr_dl, 2.0)


@given(d1=st.floats(min_value=5e5, max_value=3e6), factor=st.floats(min_value=1.001, max_value=3.0))
def test_budget_decreasing_in_distance(d1, factor):
    assert path_loss(d1 * factor, 2e9) < path_loss(d1, 2e9)


def test_shifted_profile(budgets):
    g, lb = budgets[90.0]
    up = lb.shifted(1.0)
    np.testing.assert_allclose(up.snr_dl - lb.snr_dl, 1.0)
    assert next(iter(up)).snr_ul[3750] == pytest.approx(lb.snr_ul[3750][0] + 1.0)

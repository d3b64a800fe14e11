"""Acceptance checks, one per criterion.

Each check prints a single ``ACCEPTANCE <n> PASS|FAIL`` line before asserting.
Run with ``pytest -s tests/test_acceptance.py`` to see them.
"""

import time

import numpy as np
import pytest

from ntn_nbiot.access import (
    RachLimits,
    TimingReference,
    precompensation_schedule,
    required_update_period,
    residual_error_check,
    ta_max,
)
from ntn_nbiot.doppler import delay_profile, doppler_profile, finite_difference_doppler
from ntn_nbiot.fading import draw_ensemble, estimated_k_factor, ncu, ndh, tap_power_db
from ntn_nbiot.link_budget import link_budget_profile
from ntn_nbiot.orbit import (
    OrbitConfig,
    PassScenario,
    pass_geometry,
    pass_half_duration,
    satellite_speed,
    slant_range_at_elevation,
)
from ntn_nbiot.phy import (
    DEFAULT_CELL_SEARCH_TABLE,
    DEFAULT_MCS_TABLE,
    DEFAULT_OVERHEAD_TABLE,
    DEFAULT_RAP_TABLE,
    ChannelModel,
    DopplerCase,
)
from test_access import linear_profiles
from test_phy import CELL_SEARCH_TEXT, RAP_TEXT, _parse_mcs

C = 299_792_458.0


def report(n, title, ok, detail, started):
    status = "PASS" if ok else "FAIL"
    print(f"\nACCEPTANCE {n:>2} {status}: {title} ({detail}; {time.perf_counter() - started:.2f} s)")
    assert ok, f"criterion {n} failed: {detail}"


@pytest.fixture(scope="module")
def overhead():
    return pass_geometry(PassScenario(alpha_max=90.0, alpha_min=30.0, sample_step=0.1))


def test_1_satellite_speed():
    t0 = time.perf_counter()
    v = satellite_speed(OrbitConfig(h0=600e3))
    report(1, "satellite speed", abs(v / 1e3 - 7.57) <= 0.01, f"v_sat = {v / 1e3:.4f} km/s", t0)


def test_2_narrowband_gain(overhead):
    t0 = time.perf_counter()
    lb = link_budget_profile(overhead)
    gain = lb.snr_ul[3750] - lb.snr_ul[180000]
    err = float(np.max(np.abs(gain - 16.81)))
    report(2, "narrowband gain", err <= 0.01, f"gain {gain.min():.4f}..{gain.max():.4f} dB", t0)


def test_3_ul_dl_gap(overhead):
    t0 = time.perf_counter()
    lb = link_budget_profile(overhead)
    gap = lb.snr_ul[3750] - lb.snr_dl
    ok = np.ptp(gap) <= 1e-9 and abs(gap[0] - 6.8) <= 0.05
    report(3, "UL/DL gap", ok, f"gap {gap[0]:.4f} dB, spread {np.ptp(gap):.1e} dB", t0)


def test_4_doppler(overhead):
    t0 = time.perf_counter()
    p = doppler_profile(overhead)
    peak = float(np.max(np.abs(p.f_offset)))
    fd, _ = finite_difference_doppler(overhead, p.f_c, h=1e-3)
    rel = np.abs(p.f_offset - fd) / np.maximum(np.abs(fd), 1e-6)
    worst = float(np.max(np.where(np.abs(fd) > 1e-6, rel, 0.0)))
    zero_ok = bool(np.all(np.abs(p.f_offset - fd)[np.abs(fd) <= 1e-6] <= 1e-6))
    ok = 41e3 <= peak <= 45e3 and worst <= 1e-4 and zero_ok
    report(4, "Doppler", ok, f"peak {peak / 1e3:.2f} kHz, worst FD rel. error {worst:.1e}", t0)


def test_5_delay():
    t0 = time.perf_counter()
    tau30 = slant_range_at_elevation(30.0, 600e3) / C
    tau10 = slant_range_at_elevation(10.0, 600e3) / C
    edge = delay_profile(pass_geometry(PassScenario(alpha_max=90.0, alpha_min=10.0))).tau.max()
    ok = tau30 < 4e-3 and 6.3e-3 <= tau10 <= 6.6e-3 and abs(edge - tau10) < 1e-6
    report(5, "delay", ok, f"tau(30) = {tau30 * 1e3:.3f} ms, tau(10) = {tau10 * 1e3:.3f} ms", t0)


def test_6_doppler_rate(overhead):
    t0 = time.perf_counter()
    retro = doppler_profile(overhead).peak_rate
    pro = doppler_profile(
        pass_geometry(PassScenario(orbit=OrbitConfig(retrograde=False), alpha_max=90.0, alpha_min=30.0))
    ).peak_rate
    ok = abs(retro / 544.0 - 1.0) <= 0.35
    print(
        f"\n  doppler-rate discrepancy: retrograde {retro:.1f} Hz/s ({retro / 544 - 1:+.1%}), "
        f"prograde {pro:.1f} Hz/s ({pro / 544 - 1:+.1%}) against 544 Hz/s; "
        "the quoted figure sits below both, consistent with a lower peak elevation or no surface speed"
    )
    report(6, "Doppler rate", ok, f"peak |f_rate| {retro:.1f} Hz/s", t0)


def test_7_ta_limits():
    t0 = time.perf_counter()
    ok = ta_max(0) == 16.75e-6 and ta_max(1) == 66.75e-6
    report(7, "TA limits", ok, f"{ta_max(0) * 1e6} us / {ta_max(1) * 1e6} us", t0)


def test_8_table_fidelity():
    t0 = time.perf_counter()
    problems = []

    mcs = 0
    for i, cells in _parse_mcs().items():
        for j, reps in enumerate((1, 2, 4, 8, 16)):
            mcs += 1
            if DEFAULT_MCS_TABLE.required_snr(i, reps) != cells[j]:
                problems.append(f"mcs {i}/{reps}")
    snr = DEFAULT_MCS_TABLE.snr_db
    if not (np.all(np.diff(snr, axis=1) < 0) and np.all(np.diff(snr, axis=0) > 0)):
        problems.append("mcs monotonicity")

    cases = (DopplerCase.OFFSET, DopplerCase.RATE, DopplerCase.STATIC)
    cs = 0
    for line in CELL_SEARCH_TEXT.strip().splitlines():
        model, level, *frames = line.split()
        for case, n in zip(cases, frames):
            cs += 1
            if DEFAULT_CELL_SEARCH_TABLE.frames[(ChannelModel(model), float(level), case)] != int(n):
                problems.append(f"cell search {model}/{level}/{case.value}")
    grid = sorted({k[1] for k in DEFAULT_CELL_SEARCH_TABLE.frames})
    for model in (ChannelModel.LOS, ChannelModel.NCU, ChannelModel.NDH):
        for case in cases:
            col = [DEFAULT_CELL_SEARCH_TABLE.frames[(model, s, case)] for s in grid]
            if any(b > a for a, b in zip(col, col[1:])):
                problems.append(f"cell search monotonicity {model.value}/{case.value}")

    models = (ChannelModel.AWGN, ChannelModel.NCU, ChannelModel.NDH)
    rap = 0
    for line in RAP_TEXT.strip().splitlines():
        level, *cells = [c.strip() for c in line.split("|")]
        for model, cell in zip(models, cells):
            reps, _, fail = cell.partition(" ")
            rap += 1
            req = DEFAULT_RAP_TABLE.entries[(float(level), model)]
            if (req.repetitions, req.failure_pct) != (int(reps), float(fail.strip("()%")) if fail else 0.0):
                problems.append(f"rap {level}/{model.value}")
    rap_grid = sorted({k[0] for k in DEFAULT_RAP_TABLE.entries})
    for model in models:
        col = [DEFAULT_RAP_TABLE.entries[(s, model)].repetitions for s in rap_grid]
        if any(b > a for a, b in zip(col, col[1:])):
            problems.append(f"rap monotonicity {model.value}")

    oh = DEFAULT_OVERHEAD_TABLE
    expected_dl = {"NPSS+NSSS": 15.0, "NRS": 4.0, "NPBCH": 9.52, "NB-SIB1": 4.76, "NB-SIBx": 8.0, "PDCCH": 18.15}
    if oh.dl != expected_dl or oh.ul != {"PRACH": 28.0, "DMRS": 10.29}:
        problems.append("overhead components")
    if (oh.dl_total, oh.ul_total) != (59.42, 38.29):
        problems.append("overhead totals")

    counts_ok = (mcs, cs, rap) == (70, 45, 15) == (
        DEFAULT_MCS_TABLE.snr_db.size,
        len(DEFAULT_CELL_SEARCH_TABLE.frames),
        len(DEFAULT_RAP_TABLE.entries),
    )
    ok = counts_ok and not problems
    detail = f"{mcs} MCS, {cs} cell-search, {rap} RAP cells, {len(oh.dl) + len(oh.ul)} overhead components"
    report(8, "table fidelity", ok, detail + (f"; mismatches: {problems}" if problems else ""), t0)


@pytest.mark.parametrize("factory", [ncu, ndh], ids=["NCU", "NDH"])
def test_9_fading_statistics(factory):
    t0 = time.perf_counter()
    spec = factory()
    ens = draw_ensemble(spec, 100_000, seed=2021)
    power_err = np.abs(tap_power_db(ens) - np.asarray(spec.tap_gains))
    k = estimated_k_factor(ens[:, 0])
    ok = bool(np.all(power_err <= 0.5)) and 6.3 <= k.k <= 7.7
    detail = f"{spec.name}: worst tap power error {power_err.max():.3f} dB, K = {k.k:.3f} +/- {k.stderr:.3f}"
    report(9, "fading statistics", ok, detail, t0)


def test_10_geometry_identities():
    t0 = time.perf_counter()
    peaks = (30.0, 42.7, 62.4, 90.0)
    span = sum(2 * pass_half_duration(PassScenario(alpha_max=a, alpha_min=10.0)) for a in peaks)
    step = span / 10_000
    n = 0
    worst_sum = worst_sine = 0.0
    for a in peaks:
        g = pass_geometry(PassScenario(alpha_max=a, alpha_min=10.0, sample_step=step))
        n += len(g.t)
        worst_sum = max(worst_sum, float(np.max(np.abs(g.alpha + g.beta + np.degrees(g.gamma) - 90.0))))
        sine = np.sin(np.radians(g.beta)) - g.r_e / g.r_s * np.cos(np.radians(g.alpha))
        worst_sine = max(worst_sine, float(np.max(np.abs(sine))))
    ok = n >= 10_000 and worst_sum < 1e-6 and worst_sine < 1e-9
    detail = f"{n} samples, angle sum {worst_sum:.1e} deg, sine rule {worst_sine:.1e}"
    report(10, "geometry identities", ok, detail, t0)


def test_11_compensation_compliance():
    t0 = time.perf_counter()
    dop, dly = linear_profiles(544.0, 20e-6, duration=2.0, step=1e-3)
    limits = RachLimits(0)
    periods = {
        timing: required_update_period(dop, dly, limits, timing)
        for timing in (TimingReference.ROUND_TRIP, TimingReference.ONE_WAY)
    }
    ok = all(p.freq <= 200 / 544 and p.time <= 16.75 / 20 for p in periods.values())
    ok = ok and all(p.freq > 0 and p.time > 0 for p in periods.values())

    step = 1e-3
    base = residual_error_check(precompensation_schedule(dop, dly, 0.2), dop, dly, limits)
    half = residual_error_check(precompensation_schedule(dop, dly, 0.1), dop, dly, limits)
    ok = ok and half.max_freq_residual <= base.max_freq_residual / 2 + 544.0 * step
    ok = ok and half.max_time_residual <= base.max_time_residual / 2 + 2 * 20e-6 * step

    rt, ow = periods[TimingReference.ROUND_TRIP], periods[TimingReference.ONE_WAY]
    detail = (
        f"round trip: freq {rt.freq:.3f} s, time {rt.time:.3f} s; one way: time {ow.time:.3f} s; "
        f"residual at 0.2/0.1 s: {base.max_freq_residual:.1f}/{half.max_freq_residual:.1f} Hz"
    )
    report(11, "compensation compliance", ok, detail, t0)

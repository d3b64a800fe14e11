"""UE-side adaptations: pre-compensation, RACH limits, timers and paging modes."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .doppler import DelayProfile, DopplerProfile
from .orbit import SPEED_OF_LIGHT

FREQ_TOLERANCE = 200.0  # Hz at preamble transmission
_TA_MAX = {0: 16.75e-6, 1: 66.75e-6}  # s, T_CP / 4 per NPRACH format


class TimingReference(str, enum.Enum):
    """What the time advance is measured against.

    ``round_trip``: the UE aligns to downlink timing that already lags by one
    propagation delay, so it must advance by twice the delay. ``one_way``:
    the advance is the propagation delay itself (absolute time reference).
    """

    ROUND_TRIP = "round_trip"
    ONE_WAY = "one_way"

    @property
    def factor(self) -> float:
        return 2.0 if self is TimingReference.ROUND_TRIP else 1.0


@dataclass(frozen=True)
class RachLimits:
    format: int = 0
    freq_tolerance: float = FREQ_TOLERANCE

    def __post_init__(self) -> None:
        if self.format not in _TA_MAX:
            raise ValueError(f"NPRACH format must be 0 or 1, got {self.format!r}")

    @property
    def ta_max(self) -> float:
        return _TA_MAX[self.format]


def ta_max(fmt: int) -> float:
    return RachLimits(fmt).ta_max


@dataclass(frozen=True)
class CompensationCommand:
    t: float
    freq_advance: float  # Hz added to the UL carrier
    time_advance: float  # s transmitted early


@dataclass(frozen=True)
class CompensationSchedule:
    """Zero-order-hold compensation commands."""

    commands: tuple[CompensationCommand, ...]
    update_period: float
    timing: TimingReference = TimingReference.ROUND_TRIP

    def __len__(self) -> int:
        return len(self.commands)

    def __iter__(self) -> Iterator[CompensationCommand]:
        return iter(self.commands)

    def __getitem__(self, i):
        return self.commands[i]


def _check_aligned(doppler: DopplerProfile, delay: DelayProfile) -> None:
    if len(doppler.t) != len(delay.t) or not np.array_equal(doppler.t, delay.t):
        raise ValueError("Doppler and delay profiles must share their time axis")
    if len(doppler.t) < 2:
        raise ValueError("profiles need at least two samples")


def precompensation_schedule(
    doppler: DopplerProfile,
    delay: DelayProfile,
    update_period: float,
    timing: TimingReference | str = TimingReference.ROUND_TRIP,
) -> CompensationSchedule:
    """Commands every ``update_period`` from the first profile sample.

    Each command carries the negated Doppler offset and the time advance at
    its own instant (linear interpolation between samples).
    """
    _check_aligned(doppler, delay)
    timing = TimingReference(timing)
    t = doppler.t
    step = float(np.min(np.diff(t)))
    if update_period < step * (1.0 - 1e-9):
        raise ValueError(f"update_period {update_period} is shorter than the sample step {step}")
    stride = update_period / step
    if abs(stride - round(stride)) < 1e-6 and np.allclose(np.diff(t), step, rtol=1e-9, atol=0):
        # whole number of samples per update: use the samples themselves
        idx = np.arange(0, len(t), int(round(stride)))
        times, f, tau = t[idx], doppler.f_offset[idx], delay.tau[idx]
    else:
        span = t[-1] - t[0]
        n_cmd = int(math.floor(span / update_period + 1e-9)) + 1
        times = t[0] + np.arange(n_cmd) * update_period
        f = np.interp(times, t, doppler.f_offset)
        tau = np.interp(times, t, delay.tau)
    commands = tuple(
        CompensationCommand(float(tk), float(-fk), float(timing.factor * tk_tau))
        for tk, fk, tk_tau in zip(times, f, tau)
    )
    return CompensationSchedule(commands, float(update_period), timing)


@dataclass(frozen=True)
class ResidualReport:
    max_freq_residual: float  # Hz
    max_time_residual: float  # s
    freq_compliant: bool
    time_compliant: bool

    @property
    def compliant(self) -> bool:
        return self.freq_compliant and self.time_compliant


def _held_residuals(
    schedule: CompensationSchedule, doppler: DopplerProfile, delay: DelayProfile
) -> tuple[np.ndarray, np.ndarray]:
    """Residual frequency and timing errors while commands are held.

    Evaluated at every sample and at every command instant just before the
    new command takes effect, so the worst end of each hold is included.
    """
    t = doppler.t
    cmd_t = np.array([c.t for c in schedule.commands])
    cmd_f = np.array([c.freq_advance for c in schedule.commands])
    cmd_ta = np.array([c.time_advance for c in schedule.commands])
    factor = schedule.timing.factor

    active = np.searchsorted(cmd_t, t, side="right") - 1
    covered = active >= 0
    f_res = np.abs(doppler.f_offset[covered] + cmd_f[active[covered]])
    t_res = np.abs(factor * delay.tau[covered] - cmd_ta[active[covered]])

    if len(cmd_t) > 1:
        edges = cmd_t[1:]
        f_edge = np.interp(edges, t, doppler.f_offset)
        tau_edge = np.interp(edges, t, delay.tau)
        f_res = np.concatenate([f_res, np.abs(f_edge + cmd_f[:-1])])
        t_res = np.concatenate([t_res, np.abs(factor * tau_edge - cmd_ta[:-1])])
    # the tail after the last command holds it until the profile ends
    return f_res, t_res


def residual_error_check(
    schedule: CompensationSchedule,
    doppler: DopplerProfile,
    delay: DelayProfile,
    limits: RachLimits = RachLimits(),
) -> ResidualReport:
    """Replay held commands against the continuous profiles."""
    _check_aligned(doppler, delay)
    f_res, t_res = _held_residuals(schedule, doppler, delay)
    max_f = float(f_res.max()) if len(f_res) else 0.0
    max_t = float(t_res.max()) if len(t_res) else 0.0
    return ResidualReport(
        max_freq_residual=max_f,
        max_time_residual=max_t,
        freq_compliant=max_f <= limits.freq_tolerance,
        time_compliant=max_t <= limits.ta_max,
    )


@dataclass(frozen=True)
class RequiredPeriods:
    freq: float  # s, longest compliant period for the frequency limit
    time: float  # s, same for the timing limit

    @property
    def both(self) -> float:
        return min(self.freq, self.time)


def required_update_period(
    doppler: DopplerProfile,
    delay: DelayProfile,
    limits: RachLimits = RachLimits(),
    timing: TimingReference | str = TimingReference.ROUND_TRIP,
) -> RequiredPeriods:
    """Longest whole-sample update periods that keep each residual in limits.

    Periods are tried in increasing multiples of the sample step; the result
    for each limit is the last period before the first violation. A limit
    that is broken even at one sample step yields 0.
    """
    _check_aligned(doppler, delay)
    step = float(np.min(np.diff(doppler.t)))
    n_max = len(doppler.t) - 1
    found = {"freq": None, "time": None}
    last_ok = {"freq": 0.0, "time": 0.0}
    for k in range(1, n_max + 1):
        period = k * step
        report = residual_error_check(
            precompensation_schedule(doppler, delay, period, timing), doppler, delay, limits
        )
        for key, ok in (("freq", report.freq_compliant), ("time", report.time_compliant)):
            if found[key] is None:
                if ok:
                    last_ok[key] = period
                else:
                    found[key] = last_ok[key]
        if found["freq"] is not None and found["time"] is not None:
            break
    return RequiredPeriods(
        freq=found["freq"] if found["freq"] is not None else last_ok["freq"],
        time=found["time"] if found["time"] is not None else last_ok["time"],
    )


def scheduling_offset(d: float, c: float = SPEED_OF_LIGHT) -> int:
    """Smallest whole number of milliseconds strictly above the delay ``d/c``."""
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d!r}")
    return int(math.floor(d / c * 1e3)) + 1


class PowerMode(str, enum.Enum):
    IDRX = "iDRX"
    PSM = "PSM"


@dataclass(frozen=True)
class CoverageSegment:
    start: float
    end: float
    mode: PowerMode

    @property
    def duration(self) -> float:
        return self.end - self.start


class EmptyPlanError(ValueError):
    """No passes were supplied."""


@dataclass(frozen=True)
class CoveragePlan:
    segments: tuple[CoverageSegment, ...]

    @property
    def horizon(self) -> tuple[float, float]:
        return self.segments[0].start, self.segments[-1].end

    @property
    def max_gap(self) -> float:
        gaps = [s.duration for s in self.segments if s.mode is PowerMode.PSM]
        return max(gaps, default=0.0)

    @property
    def duty_cycle(self) -> float:
        start, end = self.horizon
        covered = sum(s.duration for s in self.segments if s.mode is PowerMode.IDRX)
        return covered / (end - start)


def coverage_plan(
    passes: Sequence[tuple[float, float]], horizon: tuple[float, float] | None = None
) -> CoveragePlan:
    """iDRX during each pass, PSM in every gap, over the whole horizon.

    ``horizon`` defaults to the span from the first pass start to the last
    pass end.
    """
    if not passes:
        raise EmptyPlanError("coverage plan needs at least one pass")
    passes = [(float(a), float(b)) for a, b in passes]
    for a, b in passes:
        if not b > a:
            raise ValueError(f"pass ({a}, {b}) has no duration")
    for (a0, b0), (a1, b1) in zip(passes, passes[1:]):
        if a1 < b0:
            raise ValueError("passes must be sorted and non-overlapping")
    if horizon is None:
        horizon = (passes[0][0], passes[-1][1])
    h0, h1 = float(horizon[0]), float(horizon[1])
    if passes[0][0] < h0 or passes[-1][1] > h1:
        raise ValueError("passes extend beyond the horizon")

    segments: list[CoverageSegment] = []
    cursor = h0
    for a, b in passes:
        if a > cursor:
            segments.append(CoverageSegment(cursor, a, PowerMode.PSM))
        segments.append(CoverageSegment(a, b, PowerMode.IDRX))
        cursor = b
    if h1 > cursor:
        segments.append(CoverageSegment(cursor, h1, PowerMode.PSM))
    return CoveragePlan(tuple(segments))


def periodic_passes(
    pass_start: float, pass_end: float, revisit: float, count: int
) -> list[tuple[float, float]]:
    """The same pass window repeated every ``revisit`` seconds."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if pass_end - pass_start >= revisit:
        raise ValueError("pass is longer than the revisit interval")
    return [(pass_start + k * revisit, pass_end + k * revisit) for k in range(count)]

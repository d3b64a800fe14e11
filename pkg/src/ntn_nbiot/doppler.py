"""Doppler offset and propagation delay along a pass.

Both profiles derive from the closed-form range rate of the pass, so
``f_offset == -f_c * tau_rate`` holds sample by sample. Positive Doppler means
the satellite is approaching. Finite-difference versions are provided for
cross-checking only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .orbit import PassGeometry


class DegenerateProfileError(ValueError):
    """Raised when a profile is requested from fewer than three samples."""


@dataclass(frozen=True)
class DopplerSample:
    t: float
    f_offset: float  # Hz
    f_rate: float  # Hz/s


@dataclass(frozen=True)
class DelaySample:
    t: float
    tau: float  # s
    tau_rate: float  # s/s


@dataclass(frozen=True)
class DopplerProfile:
    t: np.ndarray
    f_offset: np.ndarray
    f_rate: np.ndarray
    f_c: float

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[DopplerSample]:
        for row in zip(self.t, self.f_offset, self.f_rate):
            yield DopplerSample(*(float(x) for x in row))

    @property
    def peak_offset(self) -> float:
        return float(np.max(np.abs(self.f_offset)))

    @property
    def peak_rate(self) -> float:
        return float(np.max(np.abs(self.f_rate)))


@dataclass(frozen=True)
class DelayProfile:
    t: np.ndarray
    tau: np.ndarray
    tau_rate: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[DelaySample]:
        for row in zip(self.t, self.tau, self.tau_rate):
            yield DelaySample(*(float(x) for x in row))

    @property
    def peak_rate(self) -> float:
        return float(np.max(np.abs(self.tau_rate)))


def _check_length(geometry: PassGeometry) -> None:
    if len(geometry) < 3:
        raise DegenerateProfileError(
            f"need at least 3 geometry samples, got {len(geometry)}"
        )


def doppler_profile(geometry: PassGeometry, f_c: float | None = None) -> DopplerProfile:
    """Doppler offset ``-(f_c/c) d'`` and its rate ``-(f_c/c) d''``.

    ``f_c`` defaults to the carrier of the pass scenario.
    """
    _check_length(geometry)
    if f_c is None:
        f_c = geometry.scenario.orbit.f_c
    scale = f_c / geometry.scenario.earth.c
    return DopplerProfile(
        t=geometry.t.copy(),
        f_offset=-scale * geometry.range_rate(),
        f_rate=-scale * geometry.range_acceleration(),
        f_c=float(f_c),
    )


def delay_profile(geometry: PassGeometry) -> DelayProfile:
    """One-way propagation delay ``d/c`` and its rate ``d'/c``."""
    _check_length(geometry)
    c = geometry.scenario.earth.c
    return DelayProfile(
        t=geometry.t.copy(),
        tau=geometry.d / c,
        tau_rate=geometry.range_rate() / c,
    )


def finite_difference_doppler(
    geometry: PassGeometry, f_c: float | None = None, h: float = 1e-3
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Doppler offset and rate from ``d(t)`` alone.

    Evaluates the slant range at ``t +/- h`` rather than using neighbouring
    samples, so the check does not depend on the sample step.
    """
    _check_length(geometry)
    if f_c is None:
        f_c = geometry.scenario.orbit.f_c
    wavelength = geometry.scenario.earth.c / f_c
    t = geometry.t
    d_minus = geometry.slant_range_at(t - h)
    d_zero = geometry.slant_range_at(t)
    d_plus = geometry.slant_range_at(t + h)
    offset = -(d_plus - d_minus) / (2.0 * h) / wavelength
    rate = -(d_plus - 2.0 * d_zero + d_minus) / (h * h) / wavelength
    return offset, rate


def finite_difference_delay_rate(geometry: PassGeometry, h: float = 1e-3) -> np.ndarray:
    _check_length(geometry)
    t = geometry.t
    c = geometry.scenario.earth.c
    return (geometry.slant_range_at(t + h) - geometry.slant_range_at(t - h)) / (2.0 * h * c)

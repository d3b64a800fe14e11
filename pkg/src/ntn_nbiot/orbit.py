"""Circular-orbit pass geometry for a fixed ground terminal.

The satellite flies a circular orbit of altitude ``h0`` over a spherical
earth. A UE sits at a fixed cross-track central angle from the ground track,
chosen so that the peak elevation of the pass equals ``alpha_max``. Time is
measured from closest approach, so every pass is symmetric about ``t = 0``.

Angles follow the usual convention: ``alpha`` is the elevation at the UE,
``beta`` the nadir (off-boresight) angle at the satellite and ``gamma`` the
earth-central angle between the sub-satellite point and the UE. They satisfy
``alpha + beta + gamma = 90 deg``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
GRAVITATIONAL_CONSTANT = 6.6743e-11  # m^3 / (kg s^2)


class GeometryError(ValueError):
    """Raised for geometrically impossible requests."""


class EmptyPassError(GeometryError):
    """The UE never rises above the minimum service elevation."""


@dataclass(frozen=True)
class EarthModel:
    """Spherical, rotating earth."""

    r_e: float = 6_357_000.0  # m
    V_e: float = 460.0  # m/s, equatorial surface speed
    M_e: float = 5.972e24  # kg
    G: float = GRAVITATIONAL_CONSTANT
    c: float = SPEED_OF_LIGHT

    def __post_init__(self) -> None:
        for name in ("r_e", "V_e", "M_e", "G", "c"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"EarthModel.{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class OrbitConfig:
    """Circular orbit and carrier.

    ``retrograde`` puts the orbit against the earth spin, which adds the
    surface speed to the ground-relative speed (worst-case Doppler).
    """

    h0: float = 600_000.0  # m
    retrograde: bool = True
    f_c: float = 2.0e9  # Hz

    def __post_init__(self) -> None:
        if not self.h0 > 0:
            raise ValueError(f"orbit altitude must be positive, got {self.h0!r}")
        if not self.f_c > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.f_c!r}")

    def radius(self, earth: EarthModel) -> float:
        return earth.r_e + self.h0


@dataclass(frozen=True)
class PassScenario:
    """One satellite pass seen from one UE."""

    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    alpha_max: float = 90.0  # deg
    alpha_min: float = 30.0  # deg
    sample_step: float = 0.1  # s
    earth: EarthModel = field(default_factory=EarthModel)

    def __post_init__(self) -> None:
        for name in ("alpha_max", "alpha_min"):
            value = getattr(self, name)
            if not 0.0 < value <= 90.0:
                raise ValueError(f"{name} must lie in (0, 90], got {value!r}")
        if not self.sample_step > 0:
            raise ValueError(f"sample_step must be positive, got {self.sample_step!r}")


@dataclass(frozen=True)
class GeometrySample:
    t: float  # s from closest approach
    gamma: float  # rad
    alpha: float  # deg
    beta: float  # deg
    d: float  # m


def satellite_speed(orbit: OrbitConfig, earth: EarthModel = EarthModel()) -> float:
    """Circular orbital speed ``sqrt(G M / r)`` in m/s."""
    return math.sqrt(earth.G * earth.M_e / orbit.radius(earth))


def relative_speed(orbit: OrbitConfig, earth: EarthModel = EarthModel()) -> float:
    """Ground-track speed at orbit radius used for Doppler.

    For a retrograde orbit the earth's surface speed is added to the orbital
    speed; otherwise the orbital speed is returned unchanged.
    """
    v = satellite_speed(orbit, earth)
    return v + earth.V_e if orbit.retrograde else v


def orbital_period(orbit: OrbitConfig, earth: EarthModel = EarthModel()) -> float:
    return 2.0 * math.pi * orbit.radius(earth) / satellite_speed(orbit, earth)


def elevation_deg(gamma, radius_ratio: float):
    """Elevation (deg) at central angle ``gamma`` (rad).

    ``radius_ratio`` is r_e / r_s. Works on scalars and arrays; ``gamma = 0``
    gives exactly 90 degrees.
    """
    gamma = np.asarray(gamma, dtype=float)
    alpha = np.degrees(np.arctan2(np.cos(gamma) - radius_ratio, np.sin(gamma)))
    return alpha if alpha.ndim else float(alpha)


def nadir_angle_deg(alpha_deg, radius_ratio: float):
    """Nadir angle at the satellite from the law of sines."""
    alpha = np.radians(np.asarray(alpha_deg, dtype=float))
    beta = np.degrees(np.arcsin(radius_ratio * np.cos(alpha)))
    return beta if beta.ndim else float(beta)


def central_angle(alpha_deg, radius_ratio: float):
    """Earth-central angle (rad) at which the satellite is seen at ``alpha_deg``."""
    alpha = np.radians(np.asarray(alpha_deg, dtype=float))
    gamma = 0.5 * np.pi - alpha - np.arcsin(radius_ratio * np.cos(alpha))
    return gamma if gamma.ndim else float(gamma)


def slant_range(gamma, r_e: float, r_s: float):
    """UE-satellite distance at central angle ``gamma`` (law of cosines)."""
    gamma = np.asarray(gamma, dtype=float)
    d = np.sqrt(r_e * r_e + r_s * r_s - 2.0 * r_e * r_s * np.cos(gamma))
    return d if d.ndim else float(d)


def slant_range_at_elevation(alpha_deg: float, h0: float, earth: EarthModel = EarthModel()) -> float:
    """Slant range for a given elevation, without going through the central angle."""
    r_e = earth.r_e
    r_s = r_e + h0
    a = math.radians(alpha_deg)
    return r_e * (math.sqrt((r_s / r_e) ** 2 - math.cos(a) ** 2) - math.sin(a))


def ue_cross_track_angle(scenario: PassScenario) -> float:
    """Cross-track central angle (rad) that makes the pass peak at ``alpha_max``.

    Inverts ``tan(alpha) = (cos g - r_e/r_s) / sin g`` on its monotone branch
    ``0 <= g < arccos(r_e/r_s)`` in closed form.
    """
    earth = scenario.earth
    rho = earth.r_e / scenario.orbit.radius(earth)
    if scenario.alpha_max >= 90.0:
        return 0.0
    if scenario.alpha_max <= 0.0:
        raise GeometryError(f"peak elevation {scenario.alpha_max} is not attainable")
    return max(central_angle(scenario.alpha_max, rho), 0.0)


@dataclass(frozen=True)
class PassGeometry:
    """Sampled pass plus the closed-form trajectory it was sampled from.

    Arrays share one index; iterate to get :class:`GeometrySample` records.
    """

    scenario: PassScenario
    cross_track: float  # rad
    angular_rate: float  # rad/s of in-track central angle
    t: np.ndarray
    gamma: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    d: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[GeometrySample]:
        for row in zip(self.t, self.gamma, self.alpha, self.beta, self.d):
            yield GeometrySample(*(float(x) for x in row))

    @property
    def r_e(self) -> float:
        return self.scenario.earth.r_e

    @property
    def r_s(self) -> float:
        return self.scenario.orbit.radius(self.scenario.earth)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def central_angle_at(self, t):
        """Total central angle from ``cos g = cos(w t) cos(g_perp)``."""
        c = np.cos(self.angular_rate * np.asarray(t, dtype=float)) * math.cos(self.cross_track)
        return np.arccos(np.clip(c, -1.0, 1.0))

    def slant_range_at(self, t):
        """Slant range at arbitrary times, for resampling and finite differences."""
        a = self.r_e * self.r_s * math.cos(self.cross_track)
        wt = self.angular_rate * np.asarray(t, dtype=float)
        return np.sqrt(self.r_e**2 + self.r_s**2 - 2.0 * a * np.cos(wt))

    def range_rate(self, t=None):
        """First time derivative of the slant range (m/s), closed form."""
        t = self.t if t is None else np.asarray(t, dtype=float)
        a = self.r_e * self.r_s * math.cos(self.cross_track)
        w = self.angular_rate
        return a * w * np.sin(w * t) / self.slant_range_at(t)

    def range_acceleration(self, t=None):
        """Second time derivative of the slant range (m/s^2), closed form."""
        t = self.t if t is None else np.asarray(t, dtype=float)
        a = self.r_e * self.r_s * math.cos(self.cross_track)
        w = self.angular_rate
        d = self.slant_range_at(t)
        d_dot = a * w * np.sin(w * t) / d
        return (a * w * w * np.cos(w * t) - d_dot**2) / d


def pass_half_duration(scenario: PassScenario) -> float:
    """Time from closest approach until elevation falls to ``alpha_min``."""
    if scenario.alpha_max < scenario.alpha_min:
        raise EmptyPassError(
            f"alpha_max={scenario.alpha_max} is below alpha_min={scenario.alpha_min}"
        )
    earth = scenario.earth
    rho = earth.r_e / scenario.orbit.radius(earth)
    g_perp = ue_cross_track_angle(scenario)
    g_edge = central_angle(scenario.alpha_min, rho)
    ratio = min(math.cos(g_edge) / math.cos(g_perp), 1.0)
    w = relative_speed(scenario.orbit, earth) / scenario.orbit.radius(earth)
    return math.acos(ratio) / w


def pass_geometry(scenario: PassScenario) -> PassGeometry:
    """Sample elevation, nadir angle, central angle and range over one pass.

    Samples sit on ``k * sample_step`` for integer ``k``, cover every instant
    with ``alpha >= alpha_min`` and are symmetric about closest approach.

    Raises
    ------
    EmptyPassError
        If ``alpha_max < alpha_min``.
    """
    half = pass_half_duration(scenario)
    earth = scenario.earth
    r_s = scenario.orbit.radius(earth)
    rho = earth.r_e / r_s
    g_perp = ue_cross_track_angle(scenario)
    w = relative_speed(scenario.orbit, earth) / r_s

    # small slack so an edge that falls exactly on the grid is kept
    n = int(math.floor(half / scenario.sample_step + 1e-9))
    t = np.arange(-n, n + 1, dtype=float) * scenario.sample_step

    gamma = np.arccos(np.clip(np.cos(w * t) * math.cos(g_perp), -1.0, 1.0))
    alpha = np.atleast_1d(elevation_deg(gamma, rho))
    beta = np.atleast_1d(nadir_angle_deg(alpha, rho))
    d = np.atleast_1d(slant_range(gamma, earth.r_e, r_s))
    return PassGeometry(
        scenario=scenario,
        cross_track=g_perp,
        angular_rate=w,
        t=t,
        gamma=gamma,
        alpha=alpha,
        beta=beta,
        d=d,
    )

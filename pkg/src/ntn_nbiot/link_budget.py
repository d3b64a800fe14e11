"""Downlink and uplink SNR over a pass.

All gains and losses are signed dB values that are summed with the transmit
power; the thermal noise power is then subtracted to give SNR:

    SNR = P_tx + PL + NF_rx + G_ue + G_sat + G_shadow + G_polar
          + G_absorb + G_scint - P_N

Losses (path loss, noise figures, shadowing, ...) are therefore negative
numbers. The downlink uses the full 180 kHz carrier and the UE noise figure;
the uplink is evaluated for every NB-IoT allocation with the satellite noise
figure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .orbit import SPEED_OF_LIGHT, PassGeometry

BOLTZMANN = 1.380649e-23  # J/K

BANDWIDTHS = (3_750, 15_000, 45_000, 90_000, 180_000)  # Hz
DL_BANDWIDTH = 180_000


class PathLossModel(str, enum.Enum):
    FREE_SPACE = "free_space"
    PAPER_EXPONENT = "paper_exponent"


@dataclass(frozen=True)
class AntennaPattern:
    """Parabolic-in-dB main lobe: exactly -3 dB at half the 3 dB width."""

    g_peak: float = 8.48  # dB
    theta_3db: float = 73.4  # deg, full width
    floor: float = 30.0  # dB below peak

    def __post_init__(self) -> None:
        if not self.theta_3db > 0:
            raise ValueError("theta_3db must be positive")


@dataclass(frozen=True)
class LinkParams:
    p_tx_dl: float = 39.0  # dBm per carrier (8 W)
    p_tx_ul: float = 23.0  # dBm, power class 3
    nf_ue: float = -9.0
    nf_sat: float = -3.0
    g_shadow: float = -3.0
    g_polar: float = -3.0
    g_absorb: float = -0.1
    g_scint: float = -2.2
    T_noise: float = 290.0  # K
    g_ue_ant: float = 0.0
    pathloss_exponent: float = 2.0
    pathloss_model: PathLossModel = PathLossModel.FREE_SPACE

    def __post_init__(self) -> None:
        if not self.T_noise > 0:
            raise ValueError("noise temperature must be positive")
        # accept plain strings from config files
        object.__setattr__(self, "pathloss_model", PathLossModel(self.pathloss_model))

    @property
    def fixed_gains(self) -> float:
        """Sum of the geometry-independent propagation terms (dB)."""
        return self.g_shadow + self.g_polar + self.g_absorb + self.g_scint


def noise_power(T: float, bandwidth: float) -> float:
    """Thermal noise power in dBm, ``10 log10(k T B) + 30``."""
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T!r}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth!r}")
    return 10.0 * math.log10(BOLTZMANN * T * bandwidth) + 30.0


def path_loss(d, f_c: float, params: LinkParams = LinkParams()):
    """Path loss as a negative gain in dB.

    ``free_space`` is the usual Friis loss at ``f_c``. ``paper_exponent`` is
    ``-10 n log10(d)`` with ``d`` in metres and no frequency term; it is kept
    only for comparison since its absolute level is not physical.
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if params.pathloss_model is PathLossModel.PAPER_EXPONENT:
        loss = 10.0 * params.pathloss_exponent * np.log10(d)
    else:
        loss = (
            20.0 * np.log10(d)
            + 20.0 * math.log10(f_c)
            + 20.0 * math.log10(4.0 * math.pi / SPEED_OF_LIGHT)
        )
    return -loss if loss.ndim else -float(loss)


def satellite_antenna_gain(beta, pattern: AntennaPattern = AntennaPattern()):
    """Satellite antenna gain (dB) at nadir angle ``beta`` (deg)."""
    beta = np.asarray(beta, dtype=float)
    half_width = 0.5 * pattern.theta_3db
    rolloff = np.minimum(3.0 * (beta / half_width) ** 2, pattern.floor)
    gain = pattern.g_peak - rolloff
    return gain if gain.ndim else float(gain)


@dataclass(frozen=True)
class LinkBudgetSample:
    t: float
    snr_dl: float
    snr_ul: dict[int, float]


@dataclass(frozen=True)
class LinkBudgetProfile:
    t: np.ndarray
    snr_dl: np.ndarray
    snr_ul: dict[int, np.ndarray]
    path_loss: np.ndarray
    antenna_gain: np.ndarray
    params: LinkParams = field(repr=False, default_factory=LinkParams)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self):
        for i in range(len(self.t)):
            yield LinkBudgetSample(
                t=float(self.t[i]),
                snr_dl=float(self.snr_dl[i]),
                snr_ul={bw: float(v[i]) for bw, v in self.snr_ul.items()},
            )

    def shifted(self, offset_db: float) -> "LinkBudgetProfile":
        """Same profile with every SNR raised by ``offset_db``."""
        return LinkBudgetProfile(
            t=self.t,
            snr_dl=self.snr_dl + offset_db,
            snr_ul={bw: v + offset_db for bw, v in self.snr_ul.items()},
            path_loss=self.path_loss,
            antenna_gain=self.antenna_gain,
            params=self.params,
        )


def link_budget_profile(
    geometry: PassGeometry,
    params: LinkParams = LinkParams(),
    pattern: AntennaPattern = AntennaPattern(),
) -> LinkBudgetProfile:
    """Evaluate DL and per-bandwidth UL SNR for every pass sample."""
    f_c = geometry.scenario.orbit.f_c
    pl = np.asarray(path_loss(geometry.d, f_c, params))
    g_sat = np.asarray(satellite_antenna_gain(geometry.beta, pattern))
    # UE antenna gain only applies inside the service window
    g_ue = np.where(geometry.alpha >= geometry.scenario.alpha_min, params.g_ue_ant, 0.0)
    channel = pl + g_sat + g_ue + params.fixed_gains

    snr_dl = (
        params.p_tx_dl + channel + params.nf_ue - noise_power(params.T_noise, DL_BANDWIDTH)
    )
    snr_ul = {
        bw: params.p_tx_ul + channel + params.nf_sat - noise_power(params.T_noise, bw)
        for bw in BANDWIDTHS
    }
    return LinkBudgetProfile(
        t=geometry.t.copy(),
        snr_dl=snr_dl,
        snr_ul=snr_ul,
        path_loss=pl,
        antenna_gain=g_sat,
        params=params,
    )

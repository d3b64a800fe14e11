"""Tapped-delay-line channels with a Rician first tap.

Coefficients are static per realization (block fading). The first tap is a
zero-phase line-of-sight component plus complex Gaussian scatter split by the
K-factor; later taps are Rayleigh. Tap gains are absolute mean powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ENSEMBLE_BLOCK = 4096  # realizations drawn per derived seed


@dataclass(frozen=True)
class FadingModelSpec:
    name: str
    tap_delays: tuple[float, ...]  # ns
    tap_gains: tuple[float, ...]  # dB
    k_factor: float = 7.0  # linear; math.inf gives a pure line-of-sight tap
    noise: bool = True  # AWGN added by the consumer

    def __post_init__(self) -> None:
        if len(self.tap_delays) != len(self.tap_gains) or not self.tap_delays:
            raise ValueError("tap delays and gains must be non-empty and the same length")
        if self.tap_delays[0] != 0:
            raise ValueError("first tap delay must be 0")
        if any(b <= a for a, b in zip(self.tap_delays, self.tap_delays[1:])):
            raise ValueError("tap delays must be strictly increasing")
        if not self.k_factor >= 0:
            raise ValueError("K-factor must be non-negative")

    @property
    def linear_gains(self) -> np.ndarray:
        return 10.0 ** (np.asarray(self.tap_gains, dtype=float) / 10.0)

    @property
    def total_power_db(self) -> float:
        return float(10.0 * np.log10(self.linear_gains.sum()))


def _k_linear(k_factor: float, k_in_db: bool) -> float:
    return 10.0 ** (k_factor / 10.0) if k_in_db else float(k_factor)


def ncu(k_factor: float = 7.0, k_in_db: bool = False) -> FadingModelSpec:
    """Urban NTN model."""
    return FadingModelSpec("NCU", (0.0, 1481.0), (-10.6, -23.4), _k_linear(k_factor, k_in_db))


def ndh(k_factor: float = 7.0, k_in_db: bool = False) -> FadingModelSpec:
    """Hilly-terrain NTN model."""
    return FadingModelSpec(
        "NDH", (0.0, 168.0, 2199.0), (-11.99, -9.89, -16.77), _k_linear(k_factor, k_in_db)
    )


MODELS = {"NCU": ncu, "NDH": ndh}


@dataclass(frozen=True)
class ChannelRealization:
    taps: np.ndarray  # complex, aligned with spec.tap_delays
    delays: tuple[float, ...]
    seed: object


def _draw(spec: FadingModelSpec, rng: np.random.Generator, n: int) -> np.ndarray:
    gains = spec.linear_gains
    scatter_power = gains.copy()
    los = np.zeros_like(gains)
    k = spec.k_factor
    if math.isinf(k):
        los[0], scatter_power[0] = math.sqrt(gains[0]), 0.0
    else:
        los[0] = math.sqrt(gains[0] * k / (k + 1.0))
        scatter_power[0] = gains[0] / (k + 1.0)
    noise = rng.standard_normal((n, len(gains), 2))
    scatter = (noise[..., 0] + 1j * noise[..., 1]) * np.sqrt(scatter_power / 2.0)
    return los + scatter


def draw_realization(spec: FadingModelSpec, seed) -> ChannelRealization:
    """One channel impulse response, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return ChannelRealization(_draw(spec, rng, 1)[0], spec.tap_delays, seed)


def draw_ensemble(spec: FadingModelSpec, n: int, seed: int) -> np.ndarray:
    """``n`` realizations as an (n, taps) complex array.

    Realizations are drawn in fixed-size blocks, block ``b`` from the seed
    ``(seed, b)``, so the output does not depend on how the work is split.
    """
    if n < 0:
        raise ValueError("ensemble size must be non-negative")
    blocks = []
    for b, start in enumerate(range(0, n, ENSEMBLE_BLOCK)):
        rng = np.random.default_rng([seed, b])
        blocks.append(_draw(spec, rng, min(ENSEMBLE_BLOCK, n - start)))
    if not blocks:
        return np.zeros((0, len(spec.tap_gains)), dtype=complex)
    return np.concatenate(blocks)


class InsufficientEnsembleError(ValueError):
    pass


@dataclass(frozen=True)
class KFactorEstimate:
    k: float
    stderr: float
    capped: bool  # True when scatter power is indistinguishable from zero


K_CAP = 1e6
MIN_ENSEMBLE = 10_000


def _greenstein_k(power: np.ndarray) -> float:
    mean = power.mean()
    var = power.var()
    los_sq = mean * mean - var
    if los_sq <= 0:
        return 0.0
    los = math.sqrt(los_sq)
    scatter = mean - los
    if scatter <= los / K_CAP:
        return math.inf
    return los / scatter


def estimated_k_factor(samples, n_batches: int = 20) -> KFactorEstimate:
    """Moment estimate of the Rician K-factor from tap coefficients.

    Uses the first two moments of the tap power: the LoS power follows from
    ``mean^2 - variance`` and the scatter power is what is left of the mean.
    The standard error comes from batch means over ``n_batches`` equal
    slices. Estimates beyond ``K_CAP`` are reported as the cap with ``capped``
    set.
    """
    power = np.abs(np.asarray(samples)) ** 2
    if power.ndim != 1:
        raise ValueError("expected a 1-D ensemble for a single tap")
    if len(power) < MIN_ENSEMBLE:
        raise InsufficientEnsembleError(
            f"need at least {MIN_ENSEMBLE} realizations, got {len(power)}"
        )
    k = _greenstein_k(power)
    if math.isinf(k):
        return KFactorEstimate(K_CAP, 0.0, True)
    batches = [_greenstein_k(b) for b in np.array_split(power, n_batches)]
    batches = [min(b, K_CAP) for b in batches]
    stderr = float(np.std(batches, ddof=1) / math.sqrt(n_batches))
    return KFactorEstimate(float(k), stderr, False)


def tap_power_db(ensemble: np.ndarray) -> np.ndarray:
    """Mean power per tap in dB."""
    return 10.0 * np.log10(np.mean(np.abs(ensemble) ** 2, axis=0))


def tap_cross_correlation(ensemble: np.ndarray) -> np.ndarray:
    """Magnitude of the normalised correlation between mean-removed taps."""
    x = ensemble - ensemble.mean(axis=0)
    cov = x.conj().T @ x / len(x)
    scale = np.sqrt(np.real(np.diag(cov)))
    return np.abs(cov / np.outer(scale, scale))

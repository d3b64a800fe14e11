"""Scenario configuration from flat ``section.key = value`` files.

Blank lines and ``#`` comments are ignored. Unknown keys are rejected so a
misspelt parameter never silently falls back to its default.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass, field
from typing import Any, Callable

from .access import TimingReference
from .link_budget import AntennaPattern, LinkParams, PathLossModel
from .orbit import EarthModel, OrbitConfig, PassScenario
from .phy import ChannelModel, DopplerCase

BASELINE_ALPHA_MAX = (62.4, 42.7, 30.0)


class ConfigError(ValueError):
    pass


def _to_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _to_float_list(text: str) -> tuple[float, ...]:
    items = [s for s in (p.strip() for p in text.split(",")) if s]
    if not items:
        raise ConfigError("empty list")
    return tuple(float(s) for s in items)


def _optional_str(text: str) -> str | None:
    text = text.strip()
    return text or None


@dataclass(frozen=True)
class ScenarioConfig:
    earth: EarthModel = field(default_factory=EarthModel)
    orbit: OrbitConfig = field(default_factory=OrbitConfig)
    link: LinkParams = field(default_factory=LinkParams)
    antenna: AntennaPattern = field(default_factory=AntennaPattern)
    alpha_max: tuple[float, ...] = (90.0,)
    alpha_min: float = 30.0
    sample_step: float = 0.1
    out: str = "out"
    seed: int = 2021
    tables_dir: str | None = None
    payload_bits: int = 100
    sync_model: ChannelModel = ChannelModel.NCU
    doppler_case: DopplerCase = DopplerCase.OFFSET
    update_period: float = 0.3
    timing: TimingReference = TimingReference.ROUND_TRIP
    rach_format: int = 0
    coverage_passes: int = 4
    fading_realizations: int = 100_000
    fading_k_factor: float = 7.0
    fading_k_in_db: bool = False
    map_extent_km: float = 1500.0
    map_step_km: float = 25.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha_max", tuple(float(a) for a in self.alpha_max))
        if not self.alpha_max:
            raise ValueError("at least one alpha_max is required")
        if self.payload_bits <= 0:
            raise ValueError("phy.payload_bits must be positive")
        if self.rach_format not in (0, 1):
            raise ValueError("rach.format must be 0 or 1")
        if not self.update_period > 0:
            raise ValueError("compensation.update_period must be positive")
        if self.coverage_passes < 1:
            raise ValueError("coverage.passes must be at least 1")
        if self.fading_realizations < 1:
            raise ValueError("fading.realizations must be at least 1")
        if not (self.map_extent_km > 0 and self.map_step_km > 0):
            raise ValueError("antenna map extent and step must be positive")

    def scenarios(self) -> list[PassScenario]:
        """One pass scenario per requested peak elevation."""
        return [
            PassScenario(
                orbit=self.orbit,
                alpha_max=a,
                alpha_min=self.alpha_min,
                sample_step=self.sample_step,
                earth=self.earth,
            )
            for a in self.alpha_max
        ]

    def flat(self) -> dict[str, Any]:
        """Every setting under its config-file key, for manifests."""
        out: dict[str, Any] = {}
        for section in _NESTED:
            obj = getattr(self, section)
            for f in dataclasses.fields(obj):
                out[f"{section}.{f.name}"] = _plain(getattr(obj, f.name))
        for key, (attr, _) in _SCALARS.items():
            out[key] = _plain(getattr(self, attr))
        return dict(sorted(out.items()))


def _plain(value):
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, tuple):
        return list(value)
    return value


_NESTED = ("earth", "orbit", "link", "antenna")

_SCALARS: dict[str, tuple[str, Callable[[str], Any]]] = {
    "pass.alpha_max": ("alpha_max", _to_float_list),
    "pass.alpha_min": ("alpha_min", float),
    "pass.sample_step": ("sample_step", float),
    "run.out": ("out", str),
    "run.seed": ("seed", int),
    "tables.dir": ("tables_dir", _optional_str),
    "phy.payload_bits": ("payload_bits", int),
    "sync.model": ("sync_model", ChannelModel),
    "sync.doppler_case": ("doppler_case", DopplerCase),
    "compensation.update_period": ("update_period", float),
    "compensation.timing": ("timing", TimingReference),
    "rach.format": ("rach_format", int),
    "coverage.passes": ("coverage_passes", int),
    "fading.realizations": ("fading_realizations", int),
    "fading.k_factor": ("fading_k_factor", float),
    "fading.k_in_db": ("fading_k_in_db", _to_bool),
    "antenna_map.extent_km": ("map_extent_km", float),
    "antenna_map.step_km": ("map_step_km", float),
}


def _converter_for(default) -> Callable[[str], Any]:
    if isinstance(default, bool):
        return _to_bool
    if isinstance(default, enum.Enum):
        return type(default)
    if isinstance(default, int):
        return int
    return float


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse config text into a :class:`ScenarioConfig`.

    Raises
    ------
    ConfigError
        On syntax errors, unknown or repeated keys, bad values, or a file
        without any settings.
    """
    settings: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in settings:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        settings[key] = value
    if not settings:
        raise ConfigError(f"{source}: no settings found")
    return apply_settings(ScenarioConfig(), settings, source)


def apply_settings(config: ScenarioConfig, settings: dict[str, str], source: str = "<config>") -> ScenarioConfig:
    nested: dict[str, dict[str, Any]] = {s: {} for s in _NESTED}
    scalars: dict[str, Any] = {}
    for key, value in settings.items():
        try:
            if key in _SCALARS:
                attr, conv = _SCALARS[key]
                scalars[attr] = conv(value)
                continue
            section, _, name = key.partition(".")
            if section not in nested:
                raise ConfigError(f"unknown key {key!r}")
            obj = getattr(config, section)
            names = {f.name for f in dataclasses.fields(obj)}
            if name not in names:
                raise ConfigError(f"unknown key {key!r}")
            nested[section][name] = _converter_for(getattr(obj, name))(value)
        except ConfigError as exc:
            raise ConfigError(f"{source}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{source}: bad value for {key!r}: {exc}") from None
    try:
        updates = {s: dataclasses.replace(getattr(config, s), **kw) for s, kw in nested.items() if kw}
        return dataclasses.replace(config, **updates, **scalars)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        return parse_config(fh.read(), str(path))


def with_pathloss(config: ScenarioConfig, model: str) -> ScenarioConfig:
    link = dataclasses.replace(config.link, pathloss_model=PathLossModel(model))
    return dataclasses.replace(config, link=link)

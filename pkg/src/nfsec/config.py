"""Scenario configuration: JSON ingestion, validation, unit conversion.

Configs carry deployment-style units (GHz, dBm); everything internal is SI
(meters, radians, watts). Validation errors name the offending field.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .geometry import SPEED_OF_LIGHT, ArrayGeometry
from .scenario import Scenario
from .uncertainty import LocationUncertainty


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"config field '{field_name}': {message}")


@dataclass
class SweepSpec:
    parameter: str
    values: list[float]


@dataclass
class BeamPatternSpec:
    x: list[float] = field(default_factory=lambda: [1.0, 60.0])
    y: list[float] = field(default_factory=lambda: [-6.0, 6.0])
    resolution: int = 200


@dataclass
class ScenarioConfig:
    """Everything a run needs, in boundary units."""

    frequency_ghz: float = 30.0
    n_elements: int = 256
    bob_locations: list[list[float]] = field(default_factory=lambda: [[50.0, 2.5], [50.0, -2.5]])
    eve_locations: list[list[float]] = field(default_factory=lambda: [[10.0, 0.5], [10.0, -0.5]])
    sigma_c: float | list[float] = 0.1
    alpha: float = 0.05
    max_power_w: float = 1.0
    rate_cap_bps: float = 1.0
    noise_dbm: float = -60.0
    reference_gain: float | None = None
    nlos_ratio: float = 0.0
    scheme: str = "proposed"
    sampling_points: int = 100
    trials: int = 10_000
    seed: int = 0
    grid_resolution: int = 400
    sweep: SweepSpec | None = None
    beampattern: BeamPatternSpec = field(default_factory=BeamPatternSpec)

    def sigmas(self) -> list[float]:
        if isinstance(self.sigma_c, (int, float)):
            return [float(self.sigma_c)] * len(self.eve_locations)
        return [float(s) for s in self.sigma_c]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) * 1e-3


def ghz_to_wavelength(frequency_ghz: float) -> float:
    return SPEED_OF_LIGHT / (frequency_ghz * 1e9)


_SWEEPABLE = ("sigma_c", "nlos_ratio", "max_power_w", "rate_cap_bps", "noise_dbm", "alpha")


def validate_config(cfg: ScenarioConfig) -> None:
    if cfg.frequency_ghz <= 0:
        raise ConfigError("frequency_ghz", f"must be > 0, got {cfg.frequency_ghz}")
    if cfg.n_elements < 1:
        raise ConfigError("n_elements", f"must be >= 1, got {cfg.n_elements}")
    if not cfg.bob_locations:
        raise ConfigError("bob_locations", "need at least one location")
    if not cfg.eve_locations:
        raise ConfigError("eve_locations", "need at least one location")
    for name, locs in (("bob_locations", cfg.bob_locations), ("eve_locations", cfg.eve_locations)):
        for i, q in enumerate(locs):
            if len(q) != 2:
                raise ConfigError(name, f"entry {i} must be an [x, y] pair, got {q}")
            if q[0] <= 0:
                raise ConfigError(name, f"entry {i} must have x > 0, got {q}")
    sigmas = cfg.sigmas()
    if len(sigmas) != len(cfg.eve_locations):
        raise ConfigError("sigma_c", f"need one value or {len(cfg.eve_locations)} values")
    if any(s < 0 for s in sigmas):
        raise ConfigError("sigma_c", "must be >= 0")
    if not 0 < cfg.alpha < 1:
        raise ConfigError("alpha", f"must lie in (0, 1), got {cfg.alpha}")
    if cfg.max_power_w <= 0:
        raise ConfigError("max_power_w", f"must be > 0, got {cfg.max_power_w}")
    if cfg.rate_cap_bps <= 0:
        raise ConfigError("rate_cap_bps", f"must be > 0, got {cfg.rate_cap_bps}")
    if cfg.reference_gain is not None and cfg.reference_gain <= 0:
        raise ConfigError("reference_gain", "must be > 0 when given")
    if not 0 <= cfg.nlos_ratio < 1:
        raise ConfigError("nlos_ratio", f"must lie in [0, 1), got {cfg.nlos_ratio}")
    if cfg.sampling_points < 1:
        raise ConfigError("sampling_points", "must be >= 1")
    if cfg.trials < 1:
        raise ConfigError("trials", "must be >= 1")
    if cfg.grid_resolution < 100:
        raise ConfigError("grid_resolution", "must be >= 100 per axis")
    if cfg.sweep is not None:
        if cfg.sweep.parameter not in _SWEEPABLE:
            raise ConfigError("sweep.parameter", f"must be one of {_SWEEPABLE}")
        if not cfg.sweep.values:
            raise ConfigError("sweep.values", "must be non-empty")
    # the confidence disc must exclude the array for every eavesdropper
    import numpy as np

    for i, (q, s) in enumerate(zip(cfg.eve_locations, sigmas)):
        radius = s * float(np.sqrt(-2.0 * np.log(cfg.alpha)))
        if radius >= float(np.hypot(q[0], q[1])):
            raise ConfigError(
                "eve_locations",
                f"entry {i}: confidence radius {radius:.4g} reaches the array "
                f"(estimated range {float(np.hypot(q[0], q[1])):.4g})",
            )


def load_config(path: str | Path) -> ScenarioConfig:
    """Read, parse, and validate a JSON config file."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("(file)", f"no such file: {path}")
    except json.JSONDecodeError as e:
        raise ConfigError("(file)", f"invalid JSON: {e}")
    return config_from_dict(raw)


_REQUIRED = ("frequency_ghz", "n_elements", "bob_locations", "eve_locations")


def config_from_dict(raw: dict) -> ScenarioConfig:
    known = set(ScenarioConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown field")
    for name in _REQUIRED:
        if name not in raw:
            raise ConfigError(name, "missing required field")
    kwargs = dict(raw)
    if "sweep" in kwargs and kwargs["sweep"] is not None:
        sw = kwargs["sweep"]
        missing = {"parameter", "values"} - set(sw)
        if missing:
            raise ConfigError(f"sweep.{sorted(missing)[0]}", "missing")
        kwargs["sweep"] = SweepSpec(parameter=sw["parameter"], values=list(sw["values"]))
    if "beampattern" in kwargs and kwargs["beampattern"] is not None:
        kwargs["beampattern"] = BeamPatternSpec(**kwargs["beampattern"])
    try:
        cfg = ScenarioConfig(**kwargs)
    except TypeError as e:
        raise ConfigError("(structure)", str(e))
    validate_config(cfg)
    return cfg


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return asdict(cfg)


def apply_sweep_value(cfg: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    """A copy of the config with one sweepable parameter overridden."""
    if parameter not in _SWEEPABLE:
        raise ConfigError("sweep.parameter", f"must be one of {_SWEEPABLE}")
    out = replace(cfg, **{parameter: value}, sweep=None)
    validate_config(out)
    return out


def to_scenario(cfg: ScenarioConfig) -> Scenario:
    """SI-unit problem instance from a validated config."""
    wavelength = ghz_to_wavelength(cfg.frequency_ghz)
    sigmas = cfg.sigmas()
    return Scenario(
        geometry=ArrayGeometry(cfg.n_elements, wavelength),
        bob_locations=tuple((float(x), float(y)) for x, y in cfg.bob_locations),
        eves=tuple(
            LocationUncertainty((float(x), float(y)), s, cfg.alpha)
            for (x, y), s in zip(cfg.eve_locations, sigmas)
        ),
        max_power=cfg.max_power_w,
        rate_cap=cfg.rate_cap_bps,
        noise_power=dbm_to_watts(cfg.noise_dbm),
        reference_gain=cfg.reference_gain,
        nlos_ratio=cfg.nlos_ratio,
    )

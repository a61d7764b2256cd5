"""Experiment configuration: TOML in, JSON run-manifest out.

Every section is optional; omitted keys fall back to the values used for the
seven-qubit dressed-state experiment. Sweeps accept either an explicit list
or a ``{start, stop, step}`` table (inclusive of ``stop``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError


@dataclass
class ParametersSection:
    set: str = "average"
    file: Optional[str] = None
    select: Optional[list] = None      # indices into the set, in chain order


@dataclass
class ChainSection:
    N: int = 7
    spacing_m: float = 400e-6
    phase_velocity_m_s: Optional[float] = None   # default: phi(8 GHz) = 0.16
    f10_GHz: Optional[float] = None              # retune every qubit


@dataclass
class DriveSection:
    control_GHz: Optional[float] = None          # default: resonant with 2-1
    power_dBm: Optional[list] = None
    rabi_MHz: Optional[list] = None


@dataclass
class ProbeSection:
    center_GHz: Optional[float] = None           # default: qubit resonance
    span_MHz: float = 200.0
    points: int = 800
    delay_step_kHz: float = 50.0


@dataclass
class PulseSection:
    enabled: bool = True
    sigma_ns: float = 50.0
    sample_rate_GHz: float = 1.0
    duration_us: float = 4.096
    heterodyne: bool = True
    if_MHz: float = 115.0
    filter_order: int = 5
    cutoff_MHz: float = 115.0
    include_line_traversal: bool = False


@dataclass
class DispersionSection:
    set: str = "dispersion_effective"   # parameter set used for this experiment
    N: int = 8
    f2_GHz: float = 7.882
    detuning_MHz: list = field(default_factory=lambda: [float(x) for x in range(32, 81, 2)])
    averaging_MHz: float = 10.0
    averaging_points: int = 41


@dataclass
class CalibrationSection:
    alpha: float = 1e-7
    applied_dBm: list = field(default_factory=lambda: [float(x) for x in np.arange(-60.0, -39.0, 1.0)])
    splitting_noise: float = 0.02      # multiplicative, relative
    transmission_noise: float = 0.01   # additive on |t|
    resonant_dBm: list = field(default_factory=lambda: [float(x) for x in np.arange(-140.0, -99.0, 1.0)])
    trials: int = 1


@dataclass
class DiscriminateSection:
    rabi_MHz: float = 40.0
    gamma20_MHz: Optional[float] = None   # override the set's value
    span_MHz: float = 120.0
    points: int = 241


@dataclass
class NoiseSection:
    amplitude: float = 0.0
    seed: int = 1234


@dataclass
class OutputSection:
    dir: str = "out"
    figures: bool = True
    figure_format: str = "png"


_SECTIONS = {
    "parameters": ParametersSection, "chain": ChainSection, "drive": DriveSection,
    "probe": ProbeSection, "pulse": PulseSection, "dispersion": DispersionSection,
    "calibration": CalibrationSection, "discriminate": DiscriminateSection,
    "noise": NoiseSection, "output": OutputSection,
}


@dataclass
class ExperimentConfig:
    parameters: ParametersSection = field(default_factory=ParametersSection)
    chain: ChainSection = field(default_factory=ChainSection)
    drive: DriveSection = field(default_factory=DriveSection)
    probe: ProbeSection = field(default_factory=ProbeSection)
    pulse: PulseSection = field(default_factory=PulseSection)
    dispersion: DispersionSection = field(default_factory=DispersionSection)
    calibration: CalibrationSection = field(default_factory=CalibrationSection)
    discriminate: DiscriminateSection = field(default_factory=DiscriminateSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict, source: str = "<config>") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: top level must be a table")
        unknown = set(data) - set(_SECTIONS)
        if unknown:
            raise ConfigError(f"{source}: unknown sections {sorted(unknown)}")
        kwargs = {name: _section(name, kind, data.get(name, {}), f"{source}: [{name}]")
                  for name, kind in _SECTIONS.items()}
        cfg = cls(**kwargs)
        cfg.validate(source)
        return cfg

    def validate(self, source: str = "<config>"):
        if self.chain.N < 1:
            raise ConfigError(f"{source}: [chain] N must be >= 1")
        if not self.chain.spacing_m > 0:
            raise ConfigError(f"{source}: [chain] spacing_m must be positive")
        if self.probe.points < 3:
            raise ConfigError(f"{source}: [probe] points must be >= 3")
        if self.drive.power_dBm is not None and self.drive.rabi_MHz is not None:
            raise ConfigError(f"{source}: [drive] give power_dBm or rabi_MHz, not both")
        for name in ("power_dBm", "rabi_MHz"):
            values = getattr(self.drive, name)
            if values is not None and len(values) == 0:
                raise ConfigError(f"{source}: [drive] {name} must not be empty")
        if self.drive.rabi_MHz is not None and min(self.drive.rabi_MHz) < 0:
            raise ConfigError(f"{source}: [drive] rabi_MHz must be non-negative")
        if self.dispersion.N < 2:
            raise ConfigError(f"{source}: [dispersion] N must be >= 2")
        if not self.dispersion.detuning_MHz:
            raise ConfigError(f"{source}: [dispersion] detuning_MHz must not be empty")
        if self.pulse.sigma_ns <= 0:
            raise ConfigError(f"{source}: [pulse] sigma_ns must be positive")
        if self.calibration.trials < 1:
            raise ConfigError(f"{source}: [calibration] trials must be >= 1")
        if self.output.figure_format not in ("png", "svg", "pdf"):
            raise ConfigError(f"{source}: [output] figure_format must be png, svg or pdf")


def _sweep(value, where):
    if isinstance(value, dict):
        try:
            start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        except KeyError as exc:
            raise ConfigError(f"{where}: range needs start, stop and step") from exc
        if step == 0 or (stop - start) / step < 0:
            raise ConfigError(f"{where}: empty or infinite range")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [float(start + i * step) for i in range(count)]
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(value)]


_SWEEP_KEYS = {("drive", "power_dBm"), ("drive", "rabi_MHz"), ("dispersion", "detuning_MHz"),
               ("calibration", "applied_dBm"), ("calibration", "resonant_dBm")}


def _section(section, kind, raw, where):
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}: must be a table")
    names = {f.name: f for f in fields(kind)}
    unknown = set(raw) - set(names)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        if (section, key) in _SWEEP_KEYS:
            kwargs[key] = None if value is None else _sweep(value, f"{where} {key}")
            continue
        default = getattr(kind(), key)
        try:
            if value is None or default is None or isinstance(default, list):
                kwargs[key] = value
            elif isinstance(default, bool):
                if not isinstance(value, bool):
                    raise TypeError
                kwargs[key] = value
            else:
                kwargs[key] = type(default)(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: bad value for {key}: {value!r}") from None
    return kind(**kwargs)


def load_config(path) -> ExperimentConfig:
    """Read a TOML config, or a JSON run-manifest written by a previous run."""
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        data = data.get("config", data)
    else:
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(data, str(path))

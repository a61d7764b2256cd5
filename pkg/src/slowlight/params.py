"""Named qubit parameter sets loaded from TOML.

The bundled corpus (``data/qubits.toml``) holds the individually measured
qubits, the chain-averaged set and an effective set for the
alternating-frequency chain. User files follow the same layout.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, ConsistencyWarning, InvalidParameterError
from .model import TransmonQubit

MISSING = "missing"

_KNOWN_KEYS = {
    "name", "f10_GHz", "anharmonicity_MHz", "Gamma10_MHz", "gamma10_MHz",
    "Gamma_nr_MHz", "gamma20_MHz", "Gamma21_MHz", "extinction_percent",
    "f01_max_GHz", "f01_min_GHz",
}


@dataclass(frozen=True)
class QubitRecord:
    """One row of a parameter table in lab units, as written in the file."""

    name: str
    f10_GHz: float
    anharmonicity_MHz: float
    Gamma10_MHz: float
    gamma10_MHz: Optional[float] = None
    Gamma_nr_MHz: Optional[float] = None
    gamma20_MHz: Optional[float] = None
    Gamma21_MHz: Optional[float] = None
    extinction_percent: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def qubit(self, f10_GHz: Optional[float] = None, warn: bool = False) -> TransmonQubit:
        """Build the model qubit, optionally retuned to ``f10_GHz``."""
        with warnings.catch_warnings():
            if not warn:
                warnings.simplefilter("ignore", ConsistencyWarning)
            return TransmonQubit.from_mhz(
                f10_GHz=self.f10_GHz if f10_GHz is None else f10_GHz,
                anharmonicity_MHz=self.anharmonicity_MHz,
                Gamma10_MHz=self.Gamma10_MHz,
                gamma10_MHz=self.gamma10_MHz,
                Gamma_nr_MHz=self.Gamma_nr_MHz,
                gamma20_MHz=self.gamma20_MHz,
                Gamma21_MHz=self.Gamma21_MHz,
            )

    def as_dict(self) -> dict:
        out = {"name": self.name, "f10_GHz": self.f10_GHz,
               "anharmonicity_MHz": self.anharmonicity_MHz,
               "Gamma10_MHz": self.Gamma10_MHz}
        for key in ("gamma10_MHz", "Gamma_nr_MHz", "Gamma21_MHz", "extinction_percent"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        out["gamma20_MHz"] = MISSING if self.gamma20_MHz is None else self.gamma20_MHz
        out.update(self.extra)
        return out


@dataclass(frozen=True)
class ParameterSet:
    name: str
    description: str
    records: tuple

    def qubits(self, **kwargs) -> list:
        return [rec.qubit(**kwargs) for rec in self.records]

    def __len__(self):
        return len(self.records)


def _record(raw: dict, where: str) -> QubitRecord:
    missing = [k for k in ("name", "f10_GHz", "anharmonicity_MHz", "Gamma10_MHz") if k not in raw]
    if missing:
        raise ConfigError(f"{where}: missing keys {missing}")
    if "gamma10_MHz" not in raw and "Gamma_nr_MHz" not in raw:
        raise ConfigError(f"{where}: need gamma10_MHz or Gamma_nr_MHz")
    g20 = raw.get("gamma20_MHz")
    if g20 == MISSING:
        g20 = None
    elif isinstance(g20, str):
        raise ConfigError(f"{where}: gamma20_MHz must be a number or {MISSING!r}")
    rec = QubitRecord(
        name=str(raw["name"]),
        f10_GHz=float(raw["f10_GHz"]),
        anharmonicity_MHz=float(raw["anharmonicity_MHz"]),
        Gamma10_MHz=float(raw["Gamma10_MHz"]),
        gamma10_MHz=_opt(raw.get("gamma10_MHz")),
        Gamma_nr_MHz=_opt(raw.get("Gamma_nr_MHz")),
        gamma20_MHz=_opt(g20),
        Gamma21_MHz=_opt(raw.get("Gamma21_MHz")),
        extinction_percent=_opt(raw.get("extinction_percent")),
        extra={k: v for k, v in raw.items() if k not in _KNOWN_KEYS},
    )
    try:
        rec.qubit()
    except InvalidParameterError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    return rec


def _opt(value):
    return None if value is None else float(value)


def parse_corpus(data: dict, source: str = "<corpus>") -> dict:
    sets = data.get("sets")
    if not isinstance(sets, dict) or not sets:
        raise ConfigError(f"{source}: no [sets.*] tables")
    out = {}
    for name, body in sets.items():
        rows = body.get("qubits", [])
        if not rows:
            raise ConfigError(f"{source}: set {name!r} has no qubits")
        records = tuple(_record(row, f"{source}: sets.{name}.qubits[{i}]")
                        for i, row in enumerate(rows))
        out[name] = ParameterSet(name, str(body.get("description", "")), records)
    return out


def load_corpus(path=None) -> dict:
    """Read a corpus file (bundled one when ``path`` is None) into ``{name: ParameterSet}``."""
    if path is None:
        text = resources.files("slowlight").joinpath("data/qubits.toml").read_text("utf-8")
        source = "qubits.toml"
    else:
        path = Path(path)
        try:
            text = path.read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read parameter file {path}: {exc}") from exc
        source = str(path)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return parse_corpus(data, source)


def load_parameter_set(name: str, path=None) -> ParameterSet:
    corpus = load_corpus(path)
    try:
        return corpus[name]
    except KeyError:
        raise ConfigError(f"unknown parameter set {name!r}; available: {sorted(corpus)}") from None


def average_qubit() -> TransmonQubit:
    """The chain-averaged qubit at 7.812 GHz."""
    return load_parameter_set("average").records[0].qubit()

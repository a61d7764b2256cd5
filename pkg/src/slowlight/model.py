"""Single three-level transmon in a waveguide.

Dressed-state scattering of a weak probe, the control-power calibration and
the two single-qubit fits (power calibration factor, 2-0 decoherence).
All frequencies and rates are angular (rad/s); convert with :func:`mhz` /
:func:`ghz` at the boundary. Time dependence is ``exp(-i omega t)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.constants import hbar

from .errors import (ConsistencyWarning, FitError, InvalidParameterError,
                     SingularModelError)
from .fitting import FitResult, damped_least_squares

TWO_PI = 2.0 * math.pi


def mhz(value):
    """Cyclic MHz to angular rad/s."""
    return TWO_PI * 1e6 * np.asarray(value, dtype=float)[()]


def ghz(value):
    """Cyclic GHz to angular rad/s."""
    return TWO_PI * 1e9 * np.asarray(value, dtype=float)[()]


def to_mhz(omega):
    return np.asarray(omega, dtype=float)[()] / (TWO_PI * 1e6)


def watts_to_dbm(power):
    return 10.0 * np.log10(np.asarray(power, dtype=float) / 1e-3)


def dbm_to_watts(dbm):
    return 1e-3 * 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def _finite(name, value):
    if value is None or not np.all(np.isfinite(value)):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class TransmonQubit:
    """Three-level ladder emitter.

    ``gamma20=None`` marks a qubit whose 2-0 decoherence was not measured;
    such a qubit can only be used with the control tone off.
    """

    omega10: float
    anharmonicity: float
    Gamma10: float
    Gamma_nr: float
    gamma20: Optional[float] = None
    Gamma21: Optional[float] = None

    def __post_init__(self):
        for name in ("omega10", "anharmonicity", "Gamma10", "Gamma_nr"):
            _finite(name, getattr(self, name))
        if self.omega10 <= 0:
            raise InvalidParameterError("omega10 must be positive")
        if self.anharmonicity < 0:
            raise InvalidParameterError("anharmonicity must be non-negative")
        if self.Gamma10 < 0 or self.Gamma_nr < 0:
            raise InvalidParameterError("rates must be non-negative")
        if self.gamma20 is not None:
            _finite("gamma20", self.gamma20)
            if self.gamma20 < 0:
                raise InvalidParameterError("gamma20 must be non-negative")
        if self.Gamma21 is not None:
            _finite("Gamma21", self.Gamma21)
            if self.Gamma21 < 0:
                raise InvalidParameterError("Gamma21 must be non-negative")
        if self.gamma20 is not None and self.gamma20 <= self.Gamma21_effective / 2:
            warnings.warn(
                f"gamma20/2pi = {to_mhz(self.gamma20):.3g} MHz does not exceed "
                f"Gamma21/4pi = {to_mhz(self.Gamma21_effective) / 2:.3g} MHz",
                ConsistencyWarning, stacklevel=3)

    @property
    def gamma10(self) -> float:
        return self.Gamma10 / 2.0 + self.Gamma_nr

    @property
    def omega21(self) -> float:
        return self.omega10 - self.anharmonicity

    @property
    def Gamma21_effective(self) -> float:
        # transmon ladder: squared matrix element doubles from 1-0 to 2-1
        return 2.0 * self.Gamma10 if self.Gamma21 is None else self.Gamma21

    @classmethod
    def from_mhz(cls, f10_GHz, anharmonicity_MHz, Gamma10_MHz, gamma10_MHz=None,
                 gamma20_MHz=None, Gamma_nr_MHz=None, Gamma21_MHz=None):
        """Build from cyclic lab units. Give either ``gamma10_MHz`` or ``Gamma_nr_MHz``."""
        if gamma10_MHz is not None:
            Gamma_nr = mhz(gamma10_MHz) - mhz(Gamma10_MHz) / 2
        elif Gamma_nr_MHz is not None:
            Gamma_nr = mhz(Gamma_nr_MHz)
        else:
            raise InvalidParameterError("need gamma10_MHz or Gamma_nr_MHz")
        return cls(
            omega10=ghz(f10_GHz),
            anharmonicity=mhz(anharmonicity_MHz),
            Gamma10=mhz(Gamma10_MHz),
            Gamma_nr=Gamma_nr,
            gamma20=None if gamma20_MHz is None else mhz(gamma20_MHz),
            Gamma21=None if Gamma21_MHz is None else mhz(Gamma21_MHz),
        )

    def with_(self, **changes) -> "TransmonQubit":
        return replace(self, **changes)

    def lossless(self) -> "TransmonQubit":
        """Copy with ``Gamma_nr = 0`` and ``gamma20 = 0``."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConsistencyWarning)
            return replace(self, Gamma_nr=0.0, gamma20=0.0)


@dataclass(frozen=True)
class ControlDrive:
    """Control tone on the 2-1 transition. ``Omega_c = 0`` means off."""

    omega_c: float
    Omega_c: float = 0.0

    def __post_init__(self):
        _finite("omega_c", self.omega_c)
        _finite("Omega_c", self.Omega_c)
        if self.Omega_c < 0:
            raise InvalidParameterError("Omega_c must be non-negative")

    @classmethod
    def resonant(cls, qubit: TransmonQubit, Omega_c: float = 0.0) -> "ControlDrive":
        return cls(omega_c=qubit.omega21, Omega_c=Omega_c)

    @classmethod
    def off(cls, qubit: TransmonQubit) -> "ControlDrive":
        return cls(omega_c=qubit.omega21, Omega_c=0.0)


def frequency_grid(values) -> np.ndarray:
    """Validate and return a strictly increasing 1-D array of probe frequencies."""
    grid = np.atleast_1d(np.asarray(values, dtype=float))
    if grid.ndim != 1 or grid.size == 0:
        raise InvalidParameterError("frequency grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(grid)):
        raise InvalidParameterError("frequency grid must be finite")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InvalidParameterError("frequency grid must be strictly increasing")
    return grid


def reflection(qubit: TransmonQubit, drive: ControlDrive, omega):
    """Reflection amplitude of one qubit for a weak probe at ``omega``.

    Vectorised over ``omega``; a scalar in gives a complex scalar out.
    """
    w = np.asarray(omega, dtype=float)
    _finite("omega", w)
    Om = drive.Omega_c
    delta = w - qubit.omega10
    g10 = qubit.gamma10
    den = 2.0 * (g10 - 1j * delta)
    if Om > 0:
        if qubit.gamma20 is None:
            raise InvalidParameterError("gamma20 is unknown for this qubit; control must be off")
        inner = 2.0 * qubit.gamma20 - 2j * (delta + drive.omega_c - qubit.omega21)
        pole = inner == 0
        if np.any(pole) and g10 == 0:
            raise SingularModelError("gamma10 = gamma20 = 0 on two-photon resonance")
        with np.errstate(divide="ignore", invalid="ignore"):
            den = np.where(pole, np.inf, den + Om**2 / np.where(pole, 1.0, inner))
    if np.any(den == 0):
        raise SingularModelError("reflection denominator vanishes (lossless resonance)")
    r = -qubit.Gamma10 / den
    return complex(r) if np.ndim(r) == 0 else r


def transmission(qubit: TransmonQubit, drive: ControlDrive, omega):
    return 1.0 + reflection(qubit, drive, omega)


def extinction(qubit: TransmonQubit) -> float:
    """On-resonance power extinction ``1 - |t|^2`` with the control off."""
    t = transmission(qubit, ControlDrive.off(qubit), qubit.omega10)
    return 1.0 - abs(t) ** 2


def resonant_transmission(qubit: TransmonQubit, Omega_c):
    """Real transmission at ``omega = omega10`` with the control on ``omega21``."""
    Om = np.asarray(Omega_c, dtype=float)
    _finite("Omega_c", Om)
    g10 = qubit.gamma10
    if g10 == 0:
        raise SingularModelError("gamma10 = 0")
    if np.any(Om > 0):
        if qubit.gamma20 is None:
            raise InvalidParameterError("gamma20 is unknown for this qubit")
        if qubit.gamma20 == 0:
            raise SingularModelError("gamma20 = 0 with the control on")
        sat = Om**2 / (4.0 * qubit.gamma20 * g10)
    else:
        sat = np.zeros_like(Om)
    t = 1.0 - (qubit.Gamma10 / (2.0 * g10)) / (1.0 + sat)
    return float(t) if np.ndim(t) == 0 else t


def rabi_to_power(qubit: TransmonQubit, drive: ControlDrive):
    """On-chip control power in watts that produces ``drive.Omega_c``."""
    if qubit.Gamma10 <= 0:
        raise SingularModelError("Gamma10 must be positive for the power calibration")
    return hbar * drive.omega_c * drive.Omega_c**2 / (4.0 * qubit.Gamma10)


def power_to_rabi(qubit: TransmonQubit, power, omega_c: float):
    """Inverse of :func:`rabi_to_power`; ``power`` in watts."""
    if qubit.Gamma10 <= 0:
        raise SingularModelError("Gamma10 must be positive for the power calibration")
    p = np.asarray(power, dtype=float)
    if np.any(p < 0):
        raise InvalidParameterError("power must be non-negative")
    Om = np.sqrt(4.0 * qubit.Gamma10 * p / (hbar * omega_c))
    return float(Om) if np.ndim(Om) == 0 else Om


@dataclass(frozen=True)
class CalibrationFit:
    a: float            # rad/s per sqrt(W)
    alpha: float        # P_c / P_applied
    a_stderr: float
    rss: float
    residuals: np.ndarray


def calibration_factor(a: float, qubit: TransmonQubit, omega_c: float) -> float:
    """Ratio of on-chip to applied power for a fitted splitting law ``Omega = a sqrt(P)``."""
    if qubit.Gamma10 <= 0:
        raise SingularModelError("Gamma10 must be positive")
    return a**2 * hbar * omega_c / (4.0 * qubit.Gamma10)


def fit_calibration_factor(splitting_data: Sequence, qubit: TransmonQubit,
                           omega_c: float) -> CalibrationFit:
    """Fit ``Omega = a sqrt(P_applied)`` to (applied power W, splitting rad/s) pairs."""
    data = np.asarray(splitting_data, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise InvalidParameterError("need at least two (power, splitting) pairs")
    power, split = data.T
    if np.any(power <= 0):
        raise InvalidParameterError("applied powers must be positive")
    if np.ptp(power) == 0:
        raise FitError("all applied powers are equal; the square-root law is not identifiable")
    root = np.sqrt(power)
    # model is linear in a, so the least-squares optimum is closed form
    a = float(root @ split / (root @ root))
    res = split - a * root
    rss = float(res @ res)
    dof = max(len(res) - 1, 1)
    a_err = math.sqrt(rss / dof / float(root @ root))
    return CalibrationFit(a=a, alpha=calibration_factor(a, qubit, omega_c),
                          a_stderr=a_err, rss=rss, residuals=res)


@dataclass(frozen=True)
class Gamma20Fit:
    gamma20: float
    gamma20_stderr: float
    rss: float
    fit: FitResult


def _resonant_t_of_power(power, gamma20, qubit, omega_c):
    g10 = qubit.gamma10
    return 1.0 - (qubit.Gamma10 / (2 * g10)) / (
        1.0 + qubit.Gamma10 * power / (gamma20 * g10 * hbar * omega_c))


def extract_gamma20(curve: Sequence, qubit: TransmonQubit, omega_c: float) -> Gamma20Fit:
    """Fit the 2-0 decoherence rate to resonant |t| versus on-chip power.

    ``Gamma10`` and ``gamma10`` of ``qubit`` are held fixed. The rate is fitted
    on a log scale so it stays positive.
    """
    data = np.asarray(curve, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 3:
        raise InvalidParameterError("need at least three (power, |t|) pairs")
    power, t = data.T
    if np.any(power <= 0):
        raise InvalidParameterError("powers must be positive")
    if power.max() < 10 * power.min():
        raise InvalidParameterError("power range must span at least a factor of 10")
    if qubit.gamma10 <= 0 or qubit.Gamma10 <= 0:
        raise SingularModelError("Gamma10 and gamma10 must be positive")

    scale = qubit.gamma10 * hbar * omega_c / qubit.Gamma10
    t0 = 1.0 - qubit.Gamma10 / (2 * qubit.gamma10)
    mid = 0.5 * (t0 + 1.0)
    above = np.nonzero(t >= mid)[0]
    p_half = power[above[0]] if above.size else math.sqrt(power.min() * power.max())
    x0 = math.log(p_half / scale)

    def residual(p):
        return _resonant_t_of_power(power, math.exp(p[0]), qubit, omega_c) - t

    fit = damped_least_squares(residual, [x0])
    g20 = math.exp(fit.params[0])
    response = qubit.Gamma10 * power.max() / (g20 * qubit.gamma10 * hbar * omega_c)
    rel_err = fit.stderr[0]  # stderr of log(gamma20) is the relative error
    if response < 1e-3 or not np.isfinite(rel_err) or rel_err > 1.0:
        raise FitError("gamma20 is not constrained by the data (flat curve or divergent fit)",
                       best=np.array([g20]),
                       diagnostics={"rss": fit.rss, "relative_stderr": rel_err,
                                    "max_response": response})
    return Gamma20Fit(gamma20=g20, gamma20_stderr=g20 * rel_err, rss=fit.rss, fit=fit)

"""Transfer-matrix scattering of a qubit chain in a single waveguide.

Field amplitudes are ordered (right-moving, left-moving). A matrix maps the
amplitudes on the left of an element to those on its right, so the chain
matrix is ``T_N P ... P T_2 P T_1`` and the through transmission is the
reciprocal of its lower-right entry.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.constants import c as C0

from .errors import (DivisionGuardError, InvalidParameterError, ShapeError,
                     SingularScattererError)
from .model import (TWO_PI, ControlDrive, TransmonQubit, frequency_grid,
                    reflection)

QUBIT_SPACING = 400e-6


@dataclass(frozen=True)
class PropagationMedium:
    phase_velocity: float

    def __post_init__(self):
        if not (0 < self.phase_velocity <= C0):
            raise InvalidParameterError("phase velocity must lie in (0, c0]")

    def phase(self, omega, spacing):
        return np.asarray(omega, dtype=float) * spacing / self.phase_velocity

    @classmethod
    def calibrated(cls, phi=0.16, frequency=8e9, spacing=QUBIT_SPACING):
        """Medium in which one spacing at ``frequency`` (Hz) gives phase ``phi``."""
        return cls(TWO_PI * frequency * spacing / phi)


DEFAULT_MEDIUM = PropagationMedium.calibrated()


@dataclass(frozen=True)
class ChainLayout:
    qubits: tuple
    spacing: float = QUBIT_SPACING
    medium: PropagationMedium = DEFAULT_MEDIUM

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))
        if not self.qubits:
            raise InvalidParameterError("a chain needs at least one qubit")
        if not self.spacing > 0:
            raise InvalidParameterError("spacing must be positive")

    @property
    def N(self) -> int:
        return len(self.qubits)

    def phase(self, omega):
        return self.medium.phase(omega, self.spacing)

    def reversed(self) -> "ChainLayout":
        return ChainLayout(self.qubits[::-1], self.spacing, self.medium)

    @classmethod
    def uniform(cls, qubit: TransmonQubit, N: int, **kwargs) -> "ChainLayout":
        return cls((qubit,) * N, **kwargs)


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex S21 sampled on an angular-frequency grid."""

    omega: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        omega = frequency_grid(self.omega)
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if values.shape != omega.shape:
            raise ShapeError(f"{values.size} values for {omega.size} grid points")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("spectrum values must be finite")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "values", values)

    @property
    def frequency(self) -> np.ndarray:
        return self.omega / TWO_PI

    def __mul__(self, other):
        if isinstance(other, ComplexSpectrum):
            _check_grid(self, other)
            return ComplexSpectrum(self.omega, self.values * other.values)
        return ComplexSpectrum(self.omega, self.values * other)

    __rmul__ = __mul__

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["frequency_Hz", "re_S21", "im_S21", "abs_S21", "arg_S21_rad"])
        for f, v in zip(self.frequency, self.values):
            writer.writerow([repr(float(f)), repr(float(v.real)), repr(float(v.imag)),
                             repr(float(abs(v))), repr(float(np.angle(v)))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path) -> "ComplexSpectrum":
        return cls.from_csv_text(Path(path).read_text("utf-8"))

    @classmethod
    def from_csv_text(cls, text: str) -> "ComplexSpectrum":
        rows = list(csv.DictReader(io.StringIO(text)))
        f = np.array([float(r["frequency_Hz"]) for r in rows])
        v = np.array([float(r["re_S21"]) + 1j * float(r["im_S21"]) for r in rows])
        return cls(TWO_PI * f, v)


def _check_grid(a: ComplexSpectrum, b: ComplexSpectrum):
    if a.omega.shape != b.omega.shape or not np.array_equal(a.omega, b.omega):
        raise ShapeError("spectra are sampled on different grids")


def qubit_tmatrix(r):
    """Transfer matrix of a symmetric scatterer with reflection ``r`` and ``t = 1 + r``.

    Broadcasts over array-valued ``r``; the result has shape ``r.shape + (2, 2)``.
    """
    r = np.asarray(r, dtype=complex)
    t = 1.0 + r
    if np.any(t == 0):
        raise SingularScattererError("t = 1 + r vanishes; add loss or move off resonance")
    out = np.empty(r.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = (t * t - r * r) / t
    out[..., 0, 1] = r / t
    out[..., 1, 0] = -r / t
    out[..., 1, 1] = 1.0 / t
    return out


def phase_tmatrix(phi):
    """Bare line segment with phase ``phi``: ``diag(exp(i phi), exp(-i phi))``."""
    phi = np.asarray(phi, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise InvalidParameterError("phase must be finite")
    out = np.zeros(phi.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = np.exp(1j * phi)
    out[..., 1, 1] = np.exp(-1j * phi)
    return out


def mirror_tmatrix(rho):
    """Lossless impedance step with real reflection ``rho`` seen from the left."""
    rho = np.asarray(rho, dtype=float)
    tau = np.sqrt(1.0 - rho**2)
    out = np.empty(rho.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1.0 / tau
    out[..., 0, 1] = -rho / tau
    out[..., 1, 0] = -rho / tau
    out[..., 1, 1] = 1.0 / tau
    return out


def transmission_of(matrix):
    return 1.0 / matrix[..., 1, 1]


def reflection_of(matrix):
    return -matrix[..., 1, 0] / matrix[..., 1, 1]


def chain_tmatrix(layout: ChainLayout, drive: ControlDrive, omega) -> np.ndarray:
    """Composite matrix of the chain at every grid frequency, shape ``(n, 2, 2)``."""
    grid = frequency_grid(omega)
    seg = phase_tmatrix(layout.phase(grid))
    total = None
    for index, qubit in enumerate(layout.qubits):
        r = np.atleast_1d(reflection(qubit, drive, grid))
        bad = np.nonzero(1.0 + r == 0)[0]
        if bad.size:
            raise SingularScattererError(
                f"qubit {index} is a perfect reflector at omega = {grid[bad[0]]!r} rad/s",
                qubit_index=index, omega=float(grid[bad[0]]))
        tq = qubit_tmatrix(r)
        total = tq if total is None else tq @ (seg @ total)
    return total


def chain_s21(layout: ChainLayout, drive: ControlDrive, omega,
              reference: Optional[str] = None) -> ComplexSpectrum:
    """Through transmission of the chain.

    ``reference="line"`` divides out the bare-line phase ``exp(i (N-1) phi)``
    so that delays are measured against the empty waveguide.
    """
    grid = frequency_grid(omega)
    s21 = transmission_of(chain_tmatrix(layout, drive, grid))
    if reference == "line":
        s21 = s21 * np.exp(-1j * (layout.N - 1) * layout.phase(grid))
    elif reference is not None:
        raise InvalidParameterError(f"unknown phase reference {reference!r}")
    return ComplexSpectrum(grid, s21)


def chain_s11(layout: ChainLayout, drive: ControlDrive, omega) -> ComplexSpectrum:
    grid = frequency_grid(omega)
    return ComplexSpectrum(grid, reflection_of(chain_tmatrix(layout, drive, grid)))


def line_s21(layout: ChainLayout, omega) -> ComplexSpectrum:
    """Transmission of the same line with all qubits far detuned."""
    grid = frequency_grid(omega)
    return ComplexSpectrum(grid, np.exp(1j * (layout.N - 1) * layout.phase(grid)))


@dataclass(frozen=True)
class BackgroundModel:
    """Scale factor times an optional two-mirror standing-wave ripple.

    ``reflectors`` holds up to two ``(reflectivity, position_m)`` pairs; the
    ripple is set by their separation along ``medium``.
    """

    scale: float = 1.0
    reflectors: tuple = field(default_factory=tuple)
    medium: PropagationMedium = DEFAULT_MEDIUM

    def __post_init__(self):
        object.__setattr__(self, "reflectors", tuple(tuple(r) for r in self.reflectors))
        if not self.scale > 0:
            raise InvalidParameterError("background scale must be positive")
        if len(self.reflectors) not in (0, 2):
            raise InvalidParameterError("background ripple needs exactly two reflectors")
        for rho, _pos in self.reflectors:
            if not 0 <= rho < 1:
                raise InvalidParameterError("reflectivities must lie in [0, 1)")

    def s21(self, omega) -> np.ndarray:
        grid = frequency_grid(omega)
        if not self.reflectors:
            return np.full(grid.shape, self.scale, dtype=complex)
        (rho1, x1), (rho2, x2) = sorted(self.reflectors, key=lambda rp: rp[1])
        seg = phase_tmatrix(self.medium.phase(grid, x2 - x1))
        m = mirror_tmatrix(rho2) @ seg @ mirror_tmatrix(rho1)
        return self.scale * transmission_of(m)


def apply_background(spectrum: ComplexSpectrum, background: BackgroundModel) -> ComplexSpectrum:
    """Return what a measurement of ``spectrum`` through ``background`` would give."""
    return ComplexSpectrum(spectrum.omega, spectrum.values * background.s21(spectrum.omega))


def normalize(measured: ComplexSpectrum, background_reference: ComplexSpectrum,
              a: float = 1.0) -> ComplexSpectrum:
    """Divide a measured spectrum by ``a`` times the detuned-qubit background."""
    _check_grid(measured, background_reference)
    if not a > 0:
        raise InvalidParameterError("normalisation factor must be positive")
    if np.any(background_reference.values == 0):
        raise DivisionGuardError("background reference has zero samples")
    return ComplexSpectrum(measured.omega, measured.values / (a * background_reference.values))


def unity_spectrum(omega) -> ComplexSpectrum:
    grid = frequency_grid(omega)
    return ComplexSpectrum(grid, np.ones_like(grid, dtype=complex))

"""Bloch band structure of the infinite qubit lattice and its group delays.

One unit cell is a qubit followed by a bare segment. The Bloch phase obeys
``cos(kd) = cos(phi) + chi sin(phi)`` with ``chi = i r / (1 + r)``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import c as C0

from .errors import (BranchTrackingError, InsufficientStencilError,
                     InvalidParameterError, SingularModelError,
                     SingularScattererError, ValidityWarning)
from .model import TWO_PI, ControlDrive, TransmonQubit, frequency_grid, reflection
from .transfer import DEFAULT_MEDIUM, QUBIT_SPACING, PropagationMedium

GAP_TOLERANCE = 1e-9
JUMP_TOLERANCE = 0.5

STRONG = "phi>>chi"
WEAK = "phi<<chi"
NUMERIC = "numeric"


def coupling_chi(qubit: TransmonQubit, drive: ControlDrive, omega):
    r = np.asarray(reflection(qubit, drive, omega), dtype=complex)
    t = 1.0 + r
    if np.any(t == 0):
        raise SingularScattererError("t = 1 + r vanishes; chi is unbounded")
    return 1j * r / t


def _canonical(kd):
    """Pick the solution with Im >= 0, folding Re into [0, pi] where possible.

    Propagating solutions (Im within ``GAP_TOLERANCE`` of zero) take Re >= 0 so
    that rounding noise in Im cannot flip the branch.
    """
    flat = np.abs(kd.imag) <= GAP_TOLERANCE
    flip = np.where(flat, kd.real < 0, kd.imag < 0)
    kd = np.where(flip, -kd, kd)
    fold = (kd.real < 0) & np.isclose(kd.real, -math.pi, rtol=0, atol=1e-12)
    return np.where(fold, kd + TWO_PI, kd)


@dataclass(frozen=True)
class BlochSolution:
    omega: np.ndarray
    kd: np.ndarray
    spacing: float
    principal: np.ndarray           # True where 0 <= Re(kd) <= pi
    discontinuities: tuple = ()     # indices i with a jump between i-1 and i

    @property
    def k(self) -> np.ndarray:
        return self.kd / self.spacing

    @property
    def in_gap(self) -> np.ndarray:
        return self.kd.imag > GAP_TOLERANCE

    def gaps(self) -> list:
        """Contiguous ``(omega_lo, omega_hi)`` intervals with evanescent ``k``."""
        return _runs(self.omega, self.in_gap)

    def bands(self) -> list:
        return _runs(self.omega, ~self.in_gap)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        # frequencies are written as cyclic Hz
        writer.writerow(["omega_Hz", "re_kd", "im_kd", "branch", "in_gap"])
        gap = self.in_gap
        for i, w in enumerate(self.omega):
            writer.writerow([repr(float(w / TWO_PI)), repr(float(self.kd[i].real)),
                             repr(float(self.kd[i].imag)),
                             "principal" if self.principal[i] else "secondary",
                             "true" if gap[i] else "false"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _runs(omega, mask):
    out = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        if not flag and start is not None:
            out.append((float(omega[start]), float(omega[i - 1])))
            start = None
    if start is not None:
        out.append((float(omega[start]), float(omega[-1])))
    return out


def solve_kd(chi, phi):
    """Bloch phase for given coupling and segment phase (canonical branch)."""
    z = np.cos(phi) + np.asarray(chi, dtype=complex) * np.sin(phi)
    return _canonical(np.arccos(z + 0j))


def bloch_k(qubit: TransmonQubit, drive: ControlDrive, omega, *,
            spacing: float = QUBIT_SPACING,
            medium: PropagationMedium = DEFAULT_MEDIUM,
            jump_tolerance: float = JUMP_TOLERANCE) -> BlochSolution:
    """Complex Bloch wavenumber over a frequency grid.

    Each point takes the decaying solution (``Im k >= 0``). The grid is then
    walked from its lowest frequency and any step in ``kd`` larger than
    ``jump_tolerance`` is recorded in ``discontinuities`` instead of being
    silently re-wrapped.
    """
    grid = frequency_grid(omega)
    phi = medium.phase(grid, spacing)
    kd = solve_kd(coupling_chi(qubit, drive, grid), phi)
    principal = (kd.real >= -1e-12) & (kd.real <= math.pi + 1e-12)
    jumps = tuple(int(i) for i in np.nonzero(np.abs(np.diff(kd)) > jump_tolerance)[0] + 1)
    return BlochSolution(grid, kd, spacing, principal, jumps)


def quadratic_kd(qubit: TransmonQubit, drive: ControlDrive, omega, *,
                 spacing: float = QUBIT_SPACING,
                 medium: PropagationMedium = DEFAULT_MEDIUM):
    """Long-wavelength approximation ``(kd)^2 = phi^2 - 2 chi phi`` (principal root)."""
    grid = frequency_grid(omega)
    phi = medium.phase(grid, spacing)
    chi = coupling_chi(qubit, drive, grid)
    return np.sqrt(phi**2 - 2 * chi * phi + 0j)


@dataclass(frozen=True)
class BandDiagram:
    Omega_c: float
    solution: BlochSolution
    gaps: list = field(default_factory=list)
    bands: list = field(default_factory=list)


def lossless_bands(qubit: TransmonQubit, Omega_c_list, omega, *,
                   spacing: float = QUBIT_SPACING,
                   medium: PropagationMedium = DEFAULT_MEDIUM) -> list:
    """Band diagrams with ``Gamma_nr = gamma20 = 0`` for each control strength.

    The grid must not contain the bare resonance exactly when ``Omega_c = 0``
    (the lossless two-level scatterer is a perfect mirror there).
    """
    bare = qubit.lossless()
    out = []
    for Om in Omega_c_list:
        sol = bloch_k(bare, ControlDrive.resonant(bare, float(Om)), omega,
                      spacing=spacing, medium=medium)
        out.append(BandDiagram(float(Om), sol, sol.gaps(), sol.bands()))
    return out


@dataclass(frozen=True)
class DelayEstimate:
    """Group delay through ``N - 1`` spacings.

    ``n_g`` is always ``c0 * tau / ((N - 1) d)`` with the vacuum light speed.
    ``valid`` is False when an approximate formula is used outside its range.
    """

    tau: float
    N: int
    spacing: float
    regime: str = NUMERIC
    valid: bool = True
    note: str = ""

    @property
    def n_g(self) -> float:
        length = (self.N - 1) * self.spacing
        return C0 * self.tau / length if length > 0 else float("nan")

    def group_index(self, velocity: float = C0) -> float:
        """Retardation ``velocity * tau / ((N - 1) d)`` against another reference speed."""
        return group_index(self.tau, self.N, self.spacing, velocity)

    def to_dict(self) -> dict:
        return {"tau_s": self.tau, "n_g": self.n_g, "N": self.N,
                "spacing_m": self.spacing, "regime": self.regime,
                "valid": self.valid, "note": self.note}


def group_index(tau: float, N: int, spacing: float, velocity: float = C0) -> float:
    """``velocity * tau / ((N - 1) d)``; vacuum light speed unless a medium velocity is given."""
    if N < 2:
        raise InvalidParameterError("a group index needs at least two qubits")
    return velocity * tau / ((N - 1) * spacing)


def group_delay_numeric(bloch: BlochSolution, N: int, spacing: float,
                        omega_eval: float, convention: str = "re_dk") -> DelayEstimate:
    """Central-difference group delay of a Bloch solution at a grid point.

    ``convention="re_dk"`` uses ``1/v_g = Re(dk/domega)``;
    ``"re_inverse"`` uses ``v_g = Re((dk/domega)^-1)``.
    """
    w = bloch.omega
    i = int(np.argmin(np.abs(w - omega_eval)))
    if i == 0 or i == w.size - 1:
        raise InsufficientStencilError("omega_eval needs a grid point on either side")
    h1, h2 = w[i] - w[i - 1], w[i + 1] - w[i]
    if abs(w[i] - omega_eval) > 1e-6 * min(h1, h2):
        raise InvalidParameterError("omega_eval must be a grid point")
    if abs(h1 - h2) > 1e-6 * max(h1, h2):
        raise InvalidParameterError("grid is not locally uniform around omega_eval")
    if any(j in bloch.discontinuities for j in (i, i + 1)):
        raise BranchTrackingError("branch jump inside the difference stencil")
    dk = (bloch.k[i + 1] - bloch.k[i - 1]) / (h1 + h2)
    if convention == "re_dk":
        inv_vg = dk.real
    elif convention == "re_inverse":
        inv_vg = 1.0 / (1.0 / dk).real
    else:
        raise InvalidParameterError(f"unknown convention {convention!r}")
    return DelayEstimate(float((N - 1) * spacing * inv_vg), N, spacing, NUMERIC)


def lattice_delay(qubit: TransmonQubit, drive: ControlDrive, N: int, omega_eval: float, *,
                  spacing: float = QUBIT_SPACING, medium: PropagationMedium = DEFAULT_MEDIUM,
                  step: float = TWO_PI * 1e3, convention: str = "re_dk") -> DelayEstimate:
    """Numeric band-structure delay at one frequency using a three-point grid."""
    grid = omega_eval + step * np.array([-1.0, 0.0, 1.0])
    sol = bloch_k(qubit, drive, grid, spacing=spacing, medium=medium)
    return group_delay_numeric(sol, N, spacing, omega_eval, convention)


def delay_asymptote(qubit: TransmonQubit, Omega_c: float, N: int, spacing: float,
                    phi: float, regime: str) -> DelayEstimate:
    """Closed-form resonant delay in the strong- or weak-drive limit.

    Negative values (``Omega_c < 2 gamma20``) are returned as they are with
    ``valid=False``.
    """
    G = qubit.Gamma10
    g10 = qubit.gamma10
    g20 = qubit.gamma20
    if g20 is None:
        raise InvalidParameterError("gamma20 is unknown for this qubit")
    base = (4 * g10 - 2 * G) * g20 + Omega_c**2
    if base == 0:
        raise SingularModelError("(4 gamma10 - 2 Gamma10) gamma20 + Omega_c^2 vanishes")
    numerator = (N - 1) * G * (2 * Omega_c**2 - 8 * g20**2)
    if regime == STRONG:
        tau = numerator / base**2
    elif regime == WEAK:
        if g20 == 0 or G == 0:
            raise SingularModelError("weak-drive limit needs Gamma10 * gamma20 > 0")
        if base < 0:
            raise SingularModelError("weak-drive limit undefined for a negative base")
        tau = numerator / base**1.5 * math.sqrt(phi) / math.sqrt(8 * G * g20)
    else:
        raise InvalidParameterError(f"regime must be {STRONG!r} or {WEAK!r}")
    note = ""
    valid = tau > 0
    if tau == 0:
        note = "Omega_c = 2 gamma20: edge of validity"
    elif tau < 0:
        note = "negative delay: outside the range of the approximation"
    return DelayEstimate(float(tau), N, spacing, regime, valid, note)


def bandgap_width_coefficient(N: int, phi: float) -> float:
    """Approximate gap width of a finite chain in units of gamma10."""
    if N < 1 or phi <= 0:
        raise InvalidParameterError("need N >= 1 and phi > 0")
    if N >= math.pi / phi:
        warnings.warn(f"N = {N} is not below pi/phi = {math.pi / phi:.3g}", ValidityWarning,
                      stacklevel=2)
    return (N**2 - 1) * phi / 3.0

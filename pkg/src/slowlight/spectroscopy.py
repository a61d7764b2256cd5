"""Delays, transparency windows and EIT/ATS discrimination from spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import DelayEstimate
from .errors import (FitError, InsufficientStencilError, InvalidParameterError,
                     ResolutionError, StructureNotFoundError)
from .fitting import damped_least_squares
from .model import TWO_PI
from .transfer import ComplexSpectrum

SPECTROSCOPIC = "spectroscopic"
MAX_PHASE_STEP = math.pi / 2


def unwrap_phase(values, max_step: float = MAX_PHASE_STEP) -> np.ndarray:
    """Sequentially unwrapped ``Arg(values)``.

    Raises :class:`ResolutionError` when a wrapped step between neighbours
    exceeds ``max_step``, since the correct branch is then ambiguous.
    """
    phase = np.angle(np.asarray(values, dtype=complex))
    step = np.angle(np.exp(1j * np.diff(phase)))
    if step.size and np.max(np.abs(step)) > max_step:
        i = int(np.argmax(np.abs(step)))
        raise ResolutionError(f"phase step of {step[i]:.3f} rad between samples {i} and {i + 1}; "
                              "use a finer frequency grid")
    return np.concatenate([phase[:1], phase[0] + np.cumsum(step)])


def phase_gradient_delay(spectrum: ComplexSpectrum, N: int, spacing: float,
                         omega_eval: float, averaging_bandwidth: float = 0.0,
                         max_phase_step: float = MAX_PHASE_STEP) -> DelayEstimate:
    """Group delay ``dArg(S21)/domega`` at ``omega_eval``.

    With ``averaging_bandwidth == 0`` a central difference around the nearest
    grid point is used; otherwise the slope of a straight-line fit to the
    unwrapped phase over ``|omega - omega_eval| <= averaging_bandwidth / 2``
    (angular units).
    """
    w = spectrum.omega
    if averaging_bandwidth < 0:
        raise InvalidParameterError("averaging bandwidth must be non-negative")
    if averaging_bandwidth == 0:
        i = int(np.argmin(np.abs(w - omega_eval)))
        if i == 0 or i == w.size - 1:
            raise InsufficientStencilError("omega_eval needs a grid point on either side")
        sel = slice(i - 1, i + 2)
        ph = unwrap_phase(spectrum.values[sel], max_step=max_phase_step)
        slope = (ph[2] - ph[0]) / (w[i + 1] - w[i - 1])
    else:
        mask = np.abs(w - omega_eval) <= averaging_bandwidth / 2 * (1 + 1e-12)
        if mask.sum() < 3:
            raise InsufficientStencilError("fewer than three grid points inside the averaging band")
        idx = np.nonzero(mask)[0]
        if idx[-1] - idx[0] + 1 != idx.size:
            raise InvalidParameterError("averaging band is not contiguous")
        ph = unwrap_phase(spectrum.values[mask], max_step=max_phase_step)
        x = w[mask] - omega_eval
        x_mean = x.mean()
        slope = float(np.sum((x - x_mean) * (ph - ph.mean())) / np.sum((x - x_mean) ** 2))
    return DelayEstimate(float(slope), N, spacing, SPECTROSCOPIC)


@dataclass(frozen=True)
class TransparencyWindow:
    center: float          # rad/s
    bandwidth: float       # rad/s
    peak: float            # |S21| at the centre
    lower_edge: float
    upper_edge: float
    pulse_compatible: bool = True

    def to_dict(self) -> dict:
        return {"center_Hz": self.center / TWO_PI, "bandwidth_Hz": self.bandwidth / TWO_PI,
                "lower_edge_Hz": self.lower_edge / TWO_PI,
                "upper_edge_Hz": self.upper_edge / TWO_PI,
                "peak_abs_S21": self.peak, "pulse_compatible": self.pulse_compatible}


def _local_maxima(y):
    """Indices of interior maxima bracketed by strictly lower values on both sides."""
    out = []
    n = y.size
    i = 1
    while i < n - 1:
        if y[i] > y[i - 1]:
            j = i
            while j + 1 < n and y[j + 1] == y[i]:
                j += 1
            if j + 1 < n and y[j + 1] < y[i]:
                out.append((i + j) // 2)
            i = j + 1
        else:
            i += 1
    return out


def window_metrics(spectrum: ComplexSpectrum, threshold_fraction: float = 0.5,
                   required_bandwidth: float = 0.0, center_hint=None) -> TransparencyWindow:
    """Centre, peak and threshold width of the transmission window.

    The window is the interior local maximum of ``|S21|`` (nearest to
    ``center_hint`` if given, else the highest one). Its width is where
    ``|S21| >= threshold_fraction * peak``, limited by the minima on either
    side, with linear interpolation of the crossings.
    """
    if not 0 < threshold_fraction < 1:
        raise InvalidParameterError("threshold_fraction must lie in (0, 1)")
    w = spectrum.omega
    y = np.abs(spectrum.values)
    peaks = _local_maxima(y)
    if not peaks:
        raise StructureNotFoundError("no interior transmission maximum")
    if center_hint is None:
        p = max(peaks, key=lambda i: y[i])
    else:
        p = min(peaks, key=lambda i: abs(w[i] - center_hint))
    level = threshold_fraction * y[p]

    def edge(direction):
        i = p
        while 0 <= i + direction < y.size:
            j = i + direction
            if y[j] < level:
                frac = (y[i] - level) / (y[i] - y[j])
                return w[i] + frac * (w[j] - w[i])
            if y[j] > y[i]:  # climbed past the bracketing minimum
                return w[i]
            i = j
        return w[i]

    lo, hi = edge(-1), edge(+1)
    width = hi - lo
    return TransparencyWindow(center=float(w[p]), bandwidth=float(width), peak=float(y[p]),
                              lower_edge=float(lo), upper_edge=float(hi),
                              pulse_compatible=bool(width >= required_bandwidth))


# EIT / ATS line-shape discrimination ---------------------------------------

def _lorentz(x, c, w):
    return w * w / ((x - c) ** 2 + w * w)


def ats_model(x, p):
    """Two independent Lorentzian dips: ``A1, c1, w1, A2, c2, w2``."""
    return p[0] * _lorentz(x, p[1], p[2]) + p[3] * _lorentz(x, p[4], p[5])


def eit_model(x, p):
    """Broad dip minus a narrow concentric transparency: ``A, c, w, B, v``."""
    return p[0] * _lorentz(x, p[1], p[2]) - p[3] * _lorentz(x, p[1], p[4])


MODELS = {"ATS": (ats_model, 6), "EIT": (eit_model, 5)}


@dataclass(frozen=True)
class ModelComparison:
    rss: dict
    aic: dict
    weights: dict
    params: dict
    n: int
    valid: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def preferred(self) -> str:
        return max(self.weights, key=self.weights.get)

    def to_dict(self) -> dict:
        return {"n_points": self.n, "valid": self.valid, "preferred": self.preferred if self.valid else None,
                "models": {m: {"rss": self.rss.get(m), "aic": self.aic.get(m),
                               "akaike_weight": self.weights.get(m),
                               "params": [float(v) for v in self.params.get(m, [])]}
                           for m in MODELS},
                "diagnostics": self.diagnostics}


def akaike_weights(aic: dict) -> dict:
    best = min(aic.values())
    rel = {k: math.exp(-0.5 * (v - best)) for k, v in aic.items()}
    total = sum(rel.values())
    return {k: v / total for k, v in rel.items()}


def aic_value(rss: float, n: int, k: int) -> float:
    # a perfect fit would send log(rss) to -inf; floor at double precision
    return n * math.log(max(rss / n, 1e-32)) + 2 * k


def _initial_guesses(x, y):
    peaks = sorted(_local_maxima(y), key=lambda i: -y[i])
    ymax = float(y.max())
    span = float(x[-1] - x[0])
    if len(peaks) >= 2:
        i1, i2 = sorted(peaks[:2])
        c1, c2 = float(x[i1]), float(x[i2])
        a1, a2 = float(y[i1]), float(y[i2])
    else:
        ic = int(np.argmax(y))
        c1, c2 = float(x[ic]) - 0.05 * span, float(x[ic]) + 0.05 * span
        a1 = a2 = ymax
    sep = max(c2 - c1, 1e-3 * span)
    center = 0.5 * (c1 + c2)
    dip_at_center = float(np.interp(center, x, y))
    ats = [a1, c1, sep / 4, a2, c2, sep / 4]
    eit = [ymax * 1.5, center, sep, max(1.5 * ymax - dip_at_center, 1e-3), sep / 2]
    return {"ATS": ats, "EIT": eit}


def aic_discriminate(spectrum: ComplexSpectrum) -> ModelComparison:
    """Compare ATS and EIT line-shape models on ``1 - |S21|`` by Akaike weights."""
    w = spectrum.omega
    if w.size < 12:
        raise InvalidParameterError("need at least 12 points for the line-shape fits")
    dw = np.diff(w)
    if np.max(np.abs(dw - dw.mean())) > 1e-6 * dw.mean():
        raise InvalidParameterError("line shape must be sampled on a uniform grid")
    mid = 0.5 * (w[0] + w[-1])
    half = 0.5 * (w[-1] - w[0])
    x = (w - mid) / half
    y = 1.0 - np.abs(spectrum.values)
    n = y.size
    guesses = _initial_guesses(x, y)

    rss, aic, params, diag = {}, {}, {}, {}
    for name, (model, k) in MODELS.items():
        try:
            fit = damped_least_squares(lambda p, m=model: m(x, p) - y, guesses[name])
        except FitError as exc:
            diag[name] = {"error": str(exc), **exc.diagnostics}
            continue
        p = np.array(fit.params)
        # report widths as positive and centres / widths back in rad/s
        width_idx = (2, 5) if name == "ATS" else (2, 4)
        centre_idx = (1, 4) if name == "ATS" else (1,)
        p[list(width_idx)] = np.abs(p[list(width_idx)]) * half
        p[list(centre_idx)] = p[list(centre_idx)] * half + mid
        rss[name] = fit.rss
        aic[name] = aic_value(fit.rss, n, k)
        params[name] = p
    if len(aic) < len(MODELS):
        return ModelComparison(rss, aic, {m: float("nan") for m in MODELS}, params, n,
                               valid=False, diagnostics=diag)
    return ModelComparison(rss, aic, akaike_weights(aic), params, n, diagnostics=diag)

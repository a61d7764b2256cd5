"""Gaussian probe pulses: synthesis, propagation, heterodyne detection, fitting.

Waveforms are complex baseband envelopes about a carrier ``carrier`` (rad/s).
With the ``exp(-i omega t)`` convention a baseband FFT bin at cyclic
frequency ``f`` (numpy ordering) sits at absolute frequency
``carrier - 2 pi f``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import signal

from .errors import (CoverageError, FitError, InvalidParameterError,
                     SamplingError, TruncationError)
from .fitting import damped_least_squares
from .model import TWO_PI
from .transfer import ComplexSpectrum

SAMPLE_RATE = 1e9
IF_FREQUENCY = 115e6
FILTER_ORDER = 5
FILTER_CUTOFF = 115e6
COVERAGE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled complex envelope.

    ``latency`` is a known processing delay (s) added by detection stages;
    arrival fits subtract it.
    """

    sample_rate: float
    samples: np.ndarray
    start_time: float = 0.0
    carrier: float = 0.0
    latency: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=complex).reshape(-1)
        if not self.sample_rate > 0:
            raise InvalidParameterError("sample rate must be positive")
        if x.size < 2:
            raise InvalidParameterError("a waveform needs at least two samples")
        object.__setattr__(self, "samples", x)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(self.samples.size) / self.sample_rate

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) / self.sample_rate)

    def with_samples(self, samples, **changes) -> "Waveform":
        return replace(self, samples=samples, **changes)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["time_s", "re", "im", "abs"])
        for t, v in zip(self.times, self.samples):
            writer.writerow([repr(float(t)), repr(float(v.real)), repr(float(v.imag)),
                             repr(float(abs(v)))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


@dataclass(frozen=True)
class PulseSpec:
    """Gaussian envelope ``amplitude * exp(-t^2 / (2 sigma^2))`` at ``center_frequency``.

    Its bandwidth is quoted as ``1 / sigma`` in Hz (20 MHz for 50 ns).
    """

    sigma: float
    center_frequency: float
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameterError("sigma must be positive")

    @property
    def bandwidth_hz(self) -> float:
        return 1.0 / self.sigma


def synthesize_pulse(spec: PulseSpec, sample_rate: float = SAMPLE_RATE,
                     duration: float = 1e-6) -> Waveform:
    """Gaussian pulse centred in a window of length ``duration``."""
    if duration < 8 * spec.sigma:
        raise TruncationError(f"window of {duration:g} s is shorter than 8 sigma")
    if spec.sigma * sample_rate < 2:
        raise SamplingError("sample rate does not resolve the pulse envelope")
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    env = spec.amplitude * np.exp(-((t - duration / 2) ** 2) / (2 * spec.sigma**2))
    return Waveform(sample_rate, env.astype(complex), 0.0, spec.center_frequency)


def fft_grid(pulse: Waveform) -> np.ndarray:
    """Absolute angular frequencies of the pulse's FFT bins, sorted ascending."""
    f = np.fft.fftfreq(pulse.samples.size, 1.0 / pulse.sample_rate)
    return np.sort(pulse.carrier - TWO_PI * f)


def _response_on_bins(pulse: Waveform, spectrum: ComplexSpectrum, power):
    f = np.fft.fftfreq(pulse.samples.size, 1.0 / pulse.sample_rate)
    w = pulse.carrier - TWO_PI * f
    lo, hi = spectrum.omega[0], spectrum.omega[-1]
    inside = (w >= lo * (1 - 1e-15)) & (w <= hi * (1 + 1e-15))
    outside = power[~inside].sum()
    if outside > COVERAGE_TOLERANCE * power.sum():
        raise CoverageError(f"{outside / power.sum():.2e} of the pulse energy lies outside "
                            "the spectrum grid")
    response = np.zeros(w.size, dtype=complex)
    response[inside] = (np.interp(w[inside], spectrum.omega, spectrum.values.real)
                        + 1j * np.interp(w[inside], spectrum.omega, spectrum.values.imag))
    return response


def propagate(pulse: Waveform, spectrum: ComplexSpectrum) -> Waveform:
    """Apply a linear response ``S21(omega)`` to the pulse in the frequency domain.

    ``spectrum`` is interpolated linearly in Re and Im onto the FFT bins.
    Bins outside its grid are dropped; they may hold at most a fraction
    ``COVERAGE_TOLERANCE`` of the pulse energy.
    """
    spec = np.fft.fft(pulse.samples)
    power = np.abs(spec) ** 2
    response = _response_on_bins(pulse, spectrum, power)
    return pulse.with_samples(np.fft.ifft(spec * response))


def butterworth(order: int = FILTER_ORDER, cutoff: float = FILTER_CUTOFF,
                sample_rate: float = SAMPLE_RATE):
    if not 0 < cutoff < sample_rate / 2:
        raise SamplingError("cutoff must lie below the Nyquist frequency")
    return signal.butter(order, cutoff, btype="low", fs=sample_rate, output="sos")


def filter_group_delay(order: int = FILTER_ORDER, cutoff: float = FILTER_CUTOFF,
                       sample_rate: float = SAMPLE_RATE) -> float:
    """Group delay of the low-pass filter at dc, in seconds."""
    b, a = signal.sos2tf(butterworth(order, cutoff, sample_rate))
    _, gd = signal.group_delay((b, a), w=[0.0], fs=sample_rate)
    return float(gd[0]) / sample_rate


def heterodyne_chain(pulse: Waveform, if_frequency: float = IF_FREQUENCY,
                     filter_order: int = FILTER_ORDER,
                     cutoff: float = FILTER_CUTOFF) -> Waveform:
    """Mix to a real IF signal, mix back down and low-pass filter.

    The down-mixed signal carries an image at ``2 * if_frequency`` which the
    causal Butterworth filter suppresses. The filter's dc group delay is added
    to ``latency`` of the returned waveform.
    """
    fs = pulse.sample_rate
    if fs <= 4 * if_frequency:
        raise SamplingError(f"sample rate {fs:g} must exceed 4 x IF = {4 * if_frequency:g}")
    sos = butterworth(filter_order, cutoff, fs)
    t = pulse.times
    lo = np.exp(-1j * TWO_PI * if_frequency * t)
    real_if = np.real(pulse.samples * lo)
    mixed = 2.0 * real_if * np.conj(lo)
    out = signal.sosfilt(sos, mixed)
    return pulse.with_samples(out, latency=pulse.latency
                              + filter_group_delay(filter_order, cutoff, fs))


@dataclass(frozen=True)
class GaussianFit:
    amplitude: float
    center: float
    sigma: float
    rss: float


def fit_gaussian(wave: Waveform) -> GaussianFit:
    """Fit ``A exp(-(t - t0)^2 / (2 s^2))`` to ``|samples|``; ``t0`` excludes latency."""
    t = wave.times
    y = np.abs(wave.samples)
    if not np.any(y > 0):
        raise FitError("waveform is identically zero")
    i = int(np.argmax(y))
    half = y >= y[i] / 2
    width = max((t[half][-1] - t[half][0]) / 2.3548, 2.0 / wave.sample_rate)
    scale_t = width
    t_ref = t[i]

    def residual(p):
        return p[0] * np.exp(-((t - t_ref) / scale_t - p[1]) ** 2 / (2 * p[2] ** 2)) - y

    fit = damped_least_squares(residual, [y[i], 0.0, 1.0])
    a, c, s = fit.params
    if not (a > 0 and abs(s) > 0):
        raise FitError("Gaussian fit collapsed", best=fit.params, diagnostics={"rss": fit.rss})
    return GaussianFit(float(a), float(t_ref + c * scale_t - wave.latency),
                       float(abs(s) * scale_t), fit.rss)


@dataclass(frozen=True)
class PulseResult:
    arrival_time: float
    width: float
    amplitude: float
    delay: float
    efficiency: float
    delay_bandwidth_product: float
    reference_arrival: float
    reference_width: float

    def to_dict(self) -> dict:
        return {"delay_s": self.delay, "efficiency": self.efficiency,
                "sigma_fit_s": self.width, "dbp": self.delay_bandwidth_product,
                "arrival_s": self.arrival_time, "reference_arrival_s": self.reference_arrival,
                "reference_sigma_fit_s": self.reference_width, "amplitude": self.amplitude}


def fit_arrival(measured: Waveform, reference: Waveform) -> PulseResult:
    """Delay and energy efficiency of ``measured`` relative to ``reference``.

    The delay-bandwidth product uses the reference width: ``delay / sigma_ref``.
    """
    m = fit_gaussian(measured)
    r = fit_gaussian(reference)
    delay = m.center - r.center
    eff = measured.energy / reference.energy
    return PulseResult(arrival_time=m.center, width=m.sigma, amplitude=m.amplitude,
                       delay=delay, efficiency=eff,
                       delay_bandwidth_product=delay / r.sigma,
                       reference_arrival=r.center, reference_width=r.sigma)

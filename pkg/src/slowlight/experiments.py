"""Experiment drivers: dressed-state sweeps, dispersion engineering, calibration.

Each ``run_*`` function takes an :class:`ExperimentConfig` and returns plain
result objects; :mod:`slowlight.cli` turns them into files.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bands import lattice_delay, lossless_bands
from .config import ExperimentConfig
from .errors import ConfigError, InvalidParameterError, StructureNotFoundError
from .model import (TWO_PI, ControlDrive, TransmonQubit, dbm_to_watts,
                    extract_gamma20, fit_calibration_factor, ghz, mhz,
                    power_to_rabi, rabi_to_power, resonant_transmission,
                    to_mhz, transmission, watts_to_dbm)
from .params import load_parameter_set
from .pulses import (PulseResult, PulseSpec, fft_grid, fit_arrival,
                     heterodyne_chain, propagate, synthesize_pulse)
from .spectroscopy import (aic_discriminate, phase_gradient_delay,
                           window_metrics)
from .transfer import (ChainLayout, ComplexSpectrum, PropagationMedium,
                       chain_s21, line_s21)

TUNING_RANGE_GHZ = (3.0, 8.0)
DEFAULT_POWERS_DBM = [float(x) for x in np.arange(-135.0, -109.9, 0.5)]


def _map(fn, items, threads: int = 1):
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# -- building blocks from the config ------------------------------------------

def medium_from(cfg: ExperimentConfig) -> PropagationMedium:
    if cfg.chain.phase_velocity_m_s is not None:
        return PropagationMedium(cfg.chain.phase_velocity_m_s)
    return PropagationMedium.calibrated(spacing=cfg.chain.spacing_m)


def chain_records(cfg: ExperimentConfig, set_name: Optional[str] = None,
                  N: Optional[int] = None) -> list:
    pset = load_parameter_set(set_name or cfg.parameters.set, cfg.parameters.file)
    records = list(pset.records)
    if cfg.parameters.select is not None and set_name is None:
        try:
            records = [records[i] for i in cfg.parameters.select]
        except (IndexError, TypeError):
            raise ConfigError(f"[parameters] select {cfg.parameters.select} does not index "
                              f"set {pset.name!r} of length {len(pset)}") from None
    N = cfg.chain.N if N is None else N
    if len(records) == 1:
        records = records * N
    if len(records) < N:
        raise ConfigError(f"set {pset.name!r} has {len(records)} qubits, chain needs {N}")
    return records[:N]


def build_layout(cfg: ExperimentConfig, frequencies_GHz=None, set_name=None) -> ChainLayout:
    N = None if frequencies_GHz is None else len(frequencies_GHz)
    records = chain_records(cfg, set_name, N)
    if frequencies_GHz is None and cfg.chain.f10_GHz is not None:
        frequencies_GHz = [cfg.chain.f10_GHz] * len(records)
    if frequencies_GHz is None:
        qubits = [rec.qubit() for rec in records]
    else:
        qubits = [rec.qubit(f10_GHz=f) for rec, f in zip(records, frequencies_GHz)]
    return ChainLayout(tuple(qubits), cfg.chain.spacing_m, medium_from(cfg))


def control_frequency(cfg: ExperimentConfig, layout: ChainLayout) -> float:
    if cfg.drive.control_GHz is not None:
        return ghz(cfg.drive.control_GHz)
    return layout.qubits[0].omega21


def probe_grid(cfg: ExperimentConfig, center: float) -> np.ndarray:
    c = center if cfg.probe.center_GHz is None else ghz(cfg.probe.center_GHz)
    half = mhz(cfg.probe.span_MHz) / 2
    return c + np.linspace(-half, half, cfg.probe.points)


def pulse_spec(cfg: ExperimentConfig, carrier: float) -> PulseSpec:
    return PulseSpec(sigma=cfg.pulse.sigma_ns * 1e-9, center_frequency=carrier)


# -- pulses -----------------------------------------------------------------

@dataclass(frozen=True)
class PulseRun:
    result: PulseResult
    reference_in: object
    reference_out: object
    signal_out: object


def run_pulse(cfg: ExperimentConfig, layout: ChainLayout, drive: ControlDrive,
              carrier: float) -> PulseRun:
    """Send one Gaussian through the chain and through the detuned-qubit reference."""
    p = cfg.pulse
    pulse = synthesize_pulse(pulse_spec(cfg, carrier), p.sample_rate_GHz * 1e9,
                             p.duration_us * 1e-6)
    grid = fft_grid(pulse)
    s_chain = chain_s21(layout, drive, grid)
    s_ref = line_s21(layout, grid)
    out = propagate(pulse, s_chain)
    ref = propagate(pulse, s_ref)
    if p.heterodyne:
        kwargs = dict(if_frequency=p.if_MHz * 1e6, filter_order=p.filter_order,
                      cutoff=p.cutoff_MHz * 1e6)
        out = heterodyne_chain(out, **kwargs)
        ref = heterodyne_chain(ref, **kwargs)
    result = fit_arrival(out, ref)
    if p.include_line_traversal:
        extra = (layout.N - 1) * layout.spacing / layout.medium.phase_velocity
        result = PulseResult(result.arrival_time, result.width, result.amplitude,
                             result.delay + extra, result.efficiency,
                             (result.delay + extra) / result.reference_width,
                             result.reference_arrival, result.reference_width)
    return PulseRun(result, pulse, ref, out)


def spectroscopic_delay(layout: ChainLayout, drive: ControlDrive, omega_eval: float,
                        step: float, averaging: float = 0.0, points: int = 41):
    """Phase-gradient delay relative to the bare line."""
    if averaging > 0:
        grid = omega_eval + np.linspace(-averaging / 2, averaging / 2, points)
    else:
        grid = omega_eval + step * np.array([-1.0, 0.0, 1.0])
    spec = chain_s21(layout, drive, grid, reference="line")
    return phase_gradient_delay(spec, layout.N, layout.spacing, omega_eval, averaging)


# -- band structure -----------------------------------------------------------

@dataclass(frozen=True)
class BandRun:
    diagrams: list
    slopes: list          # dicts per Omega_c


def run_band(cfg: ExperimentConfig, threads: int = 1) -> BandRun:
    layout = build_layout(cfg)
    qubit = layout.qubits[0]
    rabi = cfg.drive.rabi_MHz if cfg.drive.rabi_MHz is not None else [0.0, 10.0, 20.0, 40.0]
    if cfg.probe.points % 2 == 1 and cfg.probe.center_GHz is None:
        raise ConfigError("[probe] points must be even for band diagrams so the bare "
                          "resonance is not a grid point")
    grid = probe_grid(cfg, qubit.omega10)
    oms = [mhz(x) for x in rabi]
    diagrams = _map(lambda Om: lossless_bands(qubit, [Om], grid, spacing=layout.spacing,
                                              medium=layout.medium)[0], oms, threads)
    slopes = []
    bare = qubit.lossless()
    for x, Om, diagram in zip(rabi, oms, diagrams):
        row = {"Omega_c_Hz": float(x) * 1e6,
               "gaps_Hz": [[lo / TWO_PI, hi / TWO_PI] for lo, hi in diagram.gaps]}
        if Om > 0:
            est = lattice_delay(bare, ControlDrive.resonant(bare, Om), layout.N, bare.omega10,
                                spacing=layout.spacing, medium=layout.medium)
            row.update({"group_velocity_m_s": (layout.N - 1) * layout.spacing / est.tau,
                        "tau_s": est.tau, "n_g": est.n_g})
        slopes.append(row)
    return BandRun(diagrams, slopes)


# -- dressed-state sweep ------------------------------------------------------

@dataclass
class SweepPoint:
    label: float                  # power in dBm or detuning in MHz
    Omega_c: float
    spectrum: ComplexSpectrum
    tau: float
    n_g: float
    window: Optional[dict] = None
    pulse: Optional[PulseRun] = None

    def to_dict(self, label_name: str) -> dict:
        out = {label_name: self.label, "Omega_c_Hz": to_mhz(self.Omega_c) * 1e6,
               "tau_s": self.tau, "n_g": self.n_g, "window": self.window}
        if self.pulse is not None:
            out["pulse"] = self.pulse.result.to_dict()
        return out


def sweep_drives(cfg: ExperimentConfig, qubit: TransmonQubit, omega_c: float):
    """``(label_dBm, Omega_c)`` pairs from the configured power or Rabi list."""
    if cfg.drive.rabi_MHz is not None:
        out = []
        for x in cfg.drive.rabi_MHz:
            Om = mhz(x)
            p = rabi_to_power(qubit, ControlDrive(omega_c, Om))
            out.append((float(watts_to_dbm(p)) if p > 0 else -math.inf, Om))
        return out
    powers = cfg.drive.power_dBm if cfg.drive.power_dBm is not None else DEFAULT_POWERS_DBM
    return [(float(p), power_to_rabi(qubit, dbm_to_watts(p), omega_c)) for p in powers]


def _window(spec, center, required):
    try:
        return window_metrics(spec, 0.5, required, center_hint=center).to_dict()
    except StructureNotFoundError:  # no window yet at weak drive
        return None


def run_ats_sweep(cfg: ExperimentConfig, threads: int = 1, pulses: Optional[bool] = None):
    layout = build_layout(cfg)
    qubit = layout.qubits[0]
    wc = control_frequency(cfg, layout)
    grid = probe_grid(cfg, qubit.omega10)
    step = TWO_PI * cfg.probe.delay_step_kHz * 1e3
    do_pulse = cfg.pulse.enabled if pulses is None else pulses
    required = TWO_PI / (cfg.pulse.sigma_ns * 1e-9)

    def point(item):
        label, Om = item
        drive = ControlDrive(wc, Om)
        spec = chain_s21(layout, drive, grid, reference="line")
        est = spectroscopic_delay(layout, drive, qubit.omega10, step)
        pr = run_pulse(cfg, layout, drive, qubit.omega10) if do_pulse else None
        return SweepPoint(label, Om, spec, est.tau, est.n_g,
                          _window(spec, qubit.omega10, required), pr)

    return _map(point, sweep_drives(cfg, qubit, wc), threads)


# -- dispersion engineering ---------------------------------------------------

@dataclass(frozen=True)
class FrequencyAssignment:
    frequencies_GHz: tuple

    def __post_init__(self):
        lo, hi = TUNING_RANGE_GHZ
        for f in self.frequencies_GHz:
            if not lo <= f <= hi:
                raise InvalidParameterError(f"{f} GHz is outside the {lo}-{hi} GHz tuning range")

    @classmethod
    def alternating(cls, f1_GHz: float, f2_GHz: float, N: int) -> "FrequencyAssignment":
        """``f2`` on the first qubit, ``f1`` on every second one."""
        return cls(tuple(f2_GHz if i % 2 == 0 else f1_GHz for i in range(N)))


def run_dispersion_sweep(cfg: ExperimentConfig, threads: int = 1,
                         pulses: Optional[bool] = None):
    d = cfg.dispersion
    do_pulse = cfg.pulse.enabled if pulses is None else pulses
    averaging = mhz(d.averaging_MHz)
    required = TWO_PI / (cfg.pulse.sigma_ns * 1e-9)

    def point(det):
        f1 = d.f2_GHz - det * 1e-3
        assign = FrequencyAssignment.alternating(f1, d.f2_GHz, d.N)
        layout = build_layout(cfg, assign.frequencies_GHz, d.set)
        drive = ControlDrive(layout.qubits[0].omega21, 0.0)
        center = ghz(0.5 * (f1 + d.f2_GHz))
        grid = probe_grid(cfg, center)
        spec = chain_s21(layout, drive, grid, reference="line")
        est = spectroscopic_delay(layout, drive, center, 0.0, averaging, d.averaging_points)
        pr = run_pulse(cfg, layout, drive, center) if do_pulse else None
        return SweepPoint(float(det), 0.0, spec, est.tau, est.n_g,
                          _window(spec, center, required), pr)

    return _map(point, d.detuning_MHz, threads)


# -- calibration ----------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationTrial:
    alpha: float
    a: float
    gamma20: float
    alpha_error: float
    gamma20_error: float


@dataclass
class CalibrationRun:
    alpha_true: float
    gamma20_true: float
    trials: list = field(default_factory=list)

    def to_dict(self) -> dict:
        a = np.array([t.alpha_error for t in self.trials])
        g = np.array([t.gamma20_error for t in self.trials])
        return {
            "alpha_true": self.alpha_true, "gamma20_true_Hz": to_mhz(self.gamma20_true) * 1e6,
            "trials": [{"alpha": t.alpha, "a_rad_s_per_sqrtW": t.a,
                        "gamma20_Hz": to_mhz(t.gamma20) * 1e6,
                        "alpha_rel_error": t.alpha_error,
                        "gamma20_rel_error": t.gamma20_error} for t in self.trials],
            "alpha_max_rel_error": float(np.max(np.abs(a))),
            "gamma20_max_rel_error": float(np.max(np.abs(g))),
        }


def synthetic_splitting(qubit, omega_c, alpha, applied_dBm, noise, rng):
    p_appl = dbm_to_watts(np.asarray(applied_dBm, dtype=float))
    split = power_to_rabi(qubit, alpha * p_appl, omega_c)
    if noise > 0:
        split = split * (1.0 + noise * rng.standard_normal(split.shape))
    return np.column_stack([p_appl, split])


def synthetic_resonant_curve(qubit, omega_c, resonant_dBm, noise, rng):
    p_c = dbm_to_watts(np.asarray(resonant_dBm, dtype=float))
    t = resonant_transmission(qubit, power_to_rabi(qubit, p_c, omega_c))
    if noise > 0:
        t = t + noise * rng.standard_normal(t.shape)
    return np.column_stack([p_c, t])


def run_calibrate(cfg: ExperimentConfig, seed: Optional[int] = None) -> CalibrationRun:
    qubit = build_layout(cfg).qubits[0]
    if qubit.gamma20 is None:
        raise ConfigError("calibration needs a qubit with a known gamma20")
    wc = control_frequency(cfg, ChainLayout((qubit,)))
    c = cfg.calibration
    seed = cfg.noise.seed if seed is None else seed
    run = CalibrationRun(c.alpha, qubit.gamma20)
    for trial in range(c.trials):
        rng = np.random.default_rng([seed, trial])
        split = synthetic_splitting(qubit, wc, c.alpha, c.applied_dBm, c.splitting_noise, rng)
        cal = fit_calibration_factor(split, qubit, wc)
        curve = synthetic_resonant_curve(qubit, wc, c.resonant_dBm, c.transmission_noise, rng)
        g = extract_gamma20(curve, qubit, wc)
        run.trials.append(CalibrationTrial(cal.alpha, cal.a, g.gamma20,
                                           cal.alpha / c.alpha - 1.0,
                                           g.gamma20 / qubit.gamma20 - 1.0))
    return run


# -- EIT / ATS discrimination -------------------------------------------------

def discrimination_trace(cfg: ExperimentConfig) -> ComplexSpectrum:
    qubit = build_layout(cfg).qubits[0]
    d = cfg.discriminate
    if d.gamma20_MHz is not None:
        qubit = qubit.with_(gamma20=mhz(d.gamma20_MHz))
    drive = ControlDrive(control_frequency(cfg, ChainLayout((qubit,))), mhz(d.rabi_MHz))
    half = mhz(d.span_MHz) / 2
    grid = qubit.omega10 + np.linspace(-half, half, d.points)
    values = transmission(qubit, drive, grid)
    if cfg.noise.amplitude > 0:
        rng = np.random.default_rng(cfg.noise.seed)
        values = values + cfg.noise.amplitude * rng.standard_normal(grid.shape)
    return ComplexSpectrum(grid, values)


def run_discriminate(cfg: ExperimentConfig):
    trace = discrimination_trace(cfg)
    return trace, aic_discriminate(trace)


# -- standalone pulse runs ----------------------------------------------------

PULSE_DEFAULT_DBM = -124.0


def run_pulses(cfg: ExperimentConfig, threads: int = 1) -> list:
    """Pulse pipeline at each configured drive point of the dressed chain.

    Without a drive list the chain is driven at ``PULSE_DEFAULT_DBM``.
    Returns ``(power_dBm, Omega_c, PulseRun)`` triples in input order.
    """
    layout = build_layout(cfg)
    qubit = layout.qubits[0]
    wc = control_frequency(cfg, layout)
    if cfg.drive.power_dBm is None and cfg.drive.rabi_MHz is None:
        drives = [(PULSE_DEFAULT_DBM, power_to_rabi(qubit, dbm_to_watts(PULSE_DEFAULT_DBM), wc))]
    else:
        drives = sweep_drives(cfg, qubit, wc)
    return _map(lambda item: (item[0], item[1],
                              run_pulse(cfg, layout, ControlDrive(wc, item[1]), qubit.omega10)),
                drives, threads)

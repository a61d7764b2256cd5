import numpy as np
import pytest

from slowlight.config import ExperimentConfig
from slowlight.errors import ConfigError, InvalidParameterError
from slowlight.experiments import (FrequencyAssignment, build_layout, chain_records,
                                   discrimination_trace, run_ats_sweep, run_band, run_calibrate,
                                   run_discriminate, run_dispersion_sweep, run_pulses)
from slowlight.model import TWO_PI, ControlDrive, dbm_to_watts, ghz, mhz
from slowlight.params import average_qubit
from slowlight.spectroscopy import _local_maxima
from slowlight.transfer import ChainLayout, chain_s21


def test_frequency_assignment():
    a = FrequencyAssignment.alternating(7.85, 7.882, 8)
    assert a.frequencies_GHz == (7.882, 7.85) * 4
    with pytest.raises(InvalidParameterError, match="tuning range"):
        FrequencyAssignment.alternating(2.9, 7.882, 4)
    with pytest.raises(InvalidParameterError):
        FrequencyAssignment((8.1,))


def test_chain_records():
    cfg = ExperimentConfig()
    assert len(chain_records(cfg)) == 7
    cfg.parameters.set = "individual"
    cfg.parameters.select = [0, 1]
    cfg.chain.N = 2
    assert [r.name for r in chain_records(cfg)] == ["qubit1", "qubit2"]
    cfg.parameters.select = [42]
    with pytest.raises(ConfigError, match="does not index"):
        chain_records(cfg)
    cfg.parameters.select = None
    cfg.chain.N = 9
    with pytest.raises(ConfigError, match="chain needs 9"):
        chain_records(cfg)


def test_retuned_layout():
    cfg = ExperimentConfig()
    cfg.chain.f10_GHz = 6.0
    layout = build_layout(cfg)
    assert all(q.omega10 == pytest.approx(ghz(6.0)) for q in layout.qubits)


def test_splitting_follows_root_power():
    cfg = ExperimentConfig()
    cfg.drive.power_dBm = [float(x) for x in np.arange(-120, -105.9, 2.0)]
    cfg.probe.points, cfg.probe.span_MHz = 4000, 300.0
    seps = []
    for p in run_ats_sweep(cfg, threads=4, pulses=False):
        w, y = p.spectrum.omega, np.abs(p.spectrum.values)
        c = w.size // 2
        seps.append(w[c + np.argmin(y[c:])] - w[np.argmin(y[:c])])
    root = np.sqrt(dbm_to_watts(np.array(cfg.drive.power_dBm)))
    k = np.sum(root * seps) / np.sum(root * root)
    assert np.max(np.abs(np.array(seps) / (k * root) - 1)) < 0.02


def test_ats_sweep_points():
    cfg = ExperimentConfig()
    cfg.drive.power_dBm = [-135.0, -122.0]
    weak, strong = run_ats_sweep(cfg, pulses=True)
    assert strong.window is not None and strong.tau > 0 and strong.pulse is not None
    assert strong.Omega_c > weak.Omega_c
    row = strong.to_dict("power_dBm")
    assert row["power_dBm"] == -122.0 and "pulse" in row


def test_subradiant_peaks_below_both_resonances():
    q = average_qubit().lossless()
    f1, f2 = 7.850, 7.882
    assign = FrequencyAssignment.alternating(f1, f2, 8)
    layout = ChainLayout(tuple(q.with_(omega10=ghz(f)) for f in assign.frequencies_GHz))
    w = ghz(7.80) + mhz(np.arange(0.0, 120.0, 0.05)) + TWO_PI * 1234.5
    y = np.abs(chain_s21(layout, ControlDrive.off(q), w).values)
    peaks = w[_local_maxima(y)]
    for f in (f1, f2):
        near = peaks[(peaks > ghz(f) - mhz(3)) & (peaks < ghz(f))]
        assert near.size >= 1


def test_dispersion_sweep_delay_falls_with_detuning():
    cfg = ExperimentConfig()
    cfg.dispersion.detuning_MHz = [32.0, 48.0, 64.0]
    pts = run_dispersion_sweep(cfg, pulses=False)
    taus = [p.tau for p in pts]
    assert taus[0] > taus[1] > taus[2] > 0
    assert all(p.window is not None for p in pts)


def test_band_run():
    cfg = ExperimentConfig()
    run = run_band(cfg)
    assert [len(d.gaps) for d in run.diagrams] == [1, 2, 2, 2]
    taus = [row["tau_s"] for row in run.slopes[1:]]
    assert taus[0] > taus[1] > taus[2]
    cfg.probe.points = 801
    with pytest.raises(ConfigError, match="even"):
        run_band(cfg)


def test_calibration_is_seeded():
    cfg = ExperimentConfig()
    cfg.calibration.trials = 3
    a, b = run_calibrate(cfg, seed=7).to_dict(), run_calibrate(cfg, seed=7).to_dict()
    assert a == b and a["alpha_max_rel_error"] < 0.05 and a["gamma20_max_rel_error"] < 0.1
    assert run_calibrate(cfg, seed=8).to_dict() != a


def test_calibration_needs_gamma20():
    cfg = ExperimentConfig()
    cfg.parameters.set, cfg.parameters.select, cfg.chain.N = "individual", [2], 1
    with pytest.raises(ConfigError, match="gamma20"):
        run_calibrate(cfg)


def test_discrimination():
    cfg = ExperimentConfig()
    trace, cmp = run_discriminate(cfg)
    assert trace.omega.size == cfg.discriminate.points
    assert cmp.preferred == "ATS"
    cfg.noise.amplitude = 0.01
    noisy = discrimination_trace(cfg)
    assert np.array_equal(noisy.values, discrimination_trace(cfg).values)
    assert not np.array_equal(noisy.values, trace.values)


def test_pulse_runs_default_drive():
    cfg = ExperimentConfig()
    (dbm, Om, run), = run_pulses(cfg)
    assert dbm == -124.0 and 0 < run.result.efficiency < 1 and run.result.delay > 0
    cfg.pulse.include_line_traversal = True
    (_, _, with_line), = run_pulses(cfg)
    layout = build_layout(cfg)
    extra = 6 * layout.spacing / layout.medium.phase_velocity
    assert with_line.result.delay - run.result.delay == pytest.approx(extra, rel=1e-9)

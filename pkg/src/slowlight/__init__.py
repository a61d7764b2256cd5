"""Slow light in a chain of transmon qubits coupled to a microwave waveguide.

Scattering of dressed three-level emitters, transfer-matrix chains, Bloch
bands, spectroscopic and pulsed group delays, and the fits used to analyse them.
"""

__version__ = "0.1.0"

from .bands import (BlochSolution, DelayEstimate, bandgap_width_coefficient, bloch_k,
                    delay_asymptote, group_delay_numeric, lattice_delay, lossless_bands)
from .config import ExperimentConfig, load_config
from .errors import (ConfigError, ConsistencyWarning, FitError, InvalidParameterError,
                     SingularModelError, SlowLightError, ValidityWarning)
from .model import (ControlDrive, TransmonQubit, calibration_factor, extinction,
                    extract_gamma20, fit_calibration_factor, power_to_rabi, rabi_to_power,
                    reflection, resonant_transmission, transmission)
from .params import average_qubit, load_parameter_set
from .pulses import PulseSpec, Waveform, fit_arrival, heterodyne_chain, propagate, synthesize_pulse
from .spectroscopy import aic_discriminate, phase_gradient_delay, window_metrics
from .transfer import (BackgroundModel, ChainLayout, ComplexSpectrum, PropagationMedium,
                       chain_s11, chain_s21, normalize)

__all__ = [
    "__version__", "BlochSolution", "DelayEstimate", "bandgap_width_coefficient", "bloch_k",
    "delay_asymptote", "group_delay_numeric", "lattice_delay", "lossless_bands",
    "ExperimentConfig", "load_config", "ConfigError", "ConsistencyWarning", "FitError",
    "InvalidParameterError", "SingularModelError", "SlowLightError", "ValidityWarning",
    "ControlDrive", "TransmonQubit", "calibration_factor", "extinction", "extract_gamma20",
    "fit_calibration_factor", "power_to_rabi", "rabi_to_power", "reflection",
    "resonant_transmission", "transmission", "average_qubit", "load_parameter_set",
    "PulseSpec", "Waveform", "fit_arrival", "heterodyne_chain", "propagate",
    "synthesize_pulse", "aic_discriminate", "phase_gradient_delay", "window_metrics",
    "BackgroundModel", "ChainLayout", "ComplexSpectrum", "PropagationMedium", "chain_s11",
    "chain_s21", "normalize",
]

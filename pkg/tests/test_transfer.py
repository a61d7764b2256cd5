import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from slowlight.errors import (ConsistencyWarning, DivisionGuardError, InvalidParameterError,
                              ShapeError, SingularScattererError)
from slowlight.model import TWO_PI, ControlDrive, TransmonQubit, ghz, mhz, reflection
from slowlight.params import load_parameter_set
from slowlight.transfer import (DEFAULT_MEDIUM, BackgroundModel, ChainLayout,
                                ComplexSpectrum, PropagationMedium, apply_background,
                                chain_s11, chain_s21, chain_tmatrix, line_s21, normalize,
                                phase_tmatrix, qubit_tmatrix, transmission_of, unity_spectrum)

complex_r = st.builds(complex, st.floats(-0.99, 0.99), st.floats(-0.99, 0.99)).filter(
    lambda r: abs(1 + r) > 1e-3)


class TestMatrices:
    def test_zero_reflection_is_identity(self):
        np.testing.assert_array_equal(qubit_tmatrix(0.0), np.eye(2))

    def test_resonant_two_level_entries(self):
        r = -12 / 13.8
        expected = np.array([[-10.2 / 1.8, -12 / 1.8], [12 / 1.8, 13.8 / 1.8]])
        np.testing.assert_allclose(qubit_tmatrix(r), expected, rtol=1e-13)

    @settings(max_examples=300, deadline=None)
    @given(r=complex_r, phi=st.floats(-math.pi, math.pi))
    def test_trace_identity(self, r, phi):
        half_trace = 0.5 * np.trace(qubit_tmatrix(r) @ phase_tmatrix(phi))
        chi = 1j * r / (1 + r)
        assert abs(half_trace - (math.cos(phi) + chi * math.sin(phi))) < 1e-12

    def test_phase_matrix(self):
        np.testing.assert_array_equal(phase_tmatrix(0.0), np.eye(2))
        np.testing.assert_allclose(phase_tmatrix(math.pi), -np.eye(2), atol=1e-15)
        phi = DEFAULT_MEDIUM.phase(ghz(7.812), 400e-6)
        assert phi == pytest.approx(0.16 * 7.812 / 8.0, rel=1e-12)
        assert round(phi, 3) == 0.156
        np.testing.assert_allclose(np.diag(phase_tmatrix(phi)),
                                   [np.exp(1j * phi), np.exp(-1j * phi)], rtol=1e-15)

    def test_lossless_segment_has_unit_determinant(self):
        assert abs(np.linalg.det(phase_tmatrix(0.37))) == pytest.approx(1.0, abs=1e-15)

    def test_singular_scatterer(self):
        with pytest.raises(SingularScattererError):
            qubit_tmatrix(-1.0)
        with pytest.raises(InvalidParameterError):
            phase_tmatrix(float("nan"))


class TestMedium:
    def test_default_velocity(self):
        assert DEFAULT_MEDIUM.phase_velocity == pytest.approx(1.2566e8, rel=1e-4)

    def test_bounds(self):
        with pytest.raises(InvalidParameterError):
            PropagationMedium(4e8)
        with pytest.raises(InvalidParameterError):
            PropagationMedium(0.0)


def seven(qubit):
    return ChainLayout.uniform(qubit, 7)


class TestChain:
    def test_single_qubit(self, qubit, drive40):
        w = qubit.omega10 + mhz(np.linspace(-80, 80, 161))
        s = chain_s21(ChainLayout((qubit,)), drive40, w)
        np.testing.assert_allclose(s.values, 1 + reflection(qubit, drive40, w), atol=1e-12)

    def test_far_detuned_chain_is_transparent(self, qubit):
        detuned = qubit.with_(omega10=qubit.omega10 - 100 * qubit.Gamma10)
        layout = ChainLayout.uniform(detuned, 7)
        w = qubit.omega10 + mhz(np.linspace(-20, 20, 81))
        s = chain_s21(layout, ControlDrive.off(detuned), w)
        assert np.all(np.abs(s.values) >= 0.999)

    def test_against_scattering_composition_in_high_precision(self, qubit, drive40):
        w = qubit.omega10 + mhz(np.array([-30.0, -12.0, 0.0, 7.5, 25.0]))
        got = chain_s21(seven(qubit), drive40, w).values
        phi = DEFAULT_MEDIUM.phase(w, 400e-6)
        for wi, gi, ph in zip(w, got, phi):
            r = reflection(qubit, drive40, wi)
            _, t, _ = oracles.chain_s21_scattering([r] * 7, ph)
            assert abs(gi - complex(t)) < 1e-9 * max(abs(complex(t)), 1e-3)

    def test_non_uniform_chain_against_oracle(self):
        qubits = load_parameter_set("individual").qubits()
        layout = ChainLayout(tuple(q for i, q in enumerate(qubits) if i not in (2, 6)))
        w = ghz(7.812) + mhz(np.array([-9.0, 0.0, 4.0]))
        got = chain_s21(layout, ControlDrive.off(layout.qubits[0]), w).values
        for wi, gi in zip(w, got):
            rs = [reflection(q, ControlDrive.off(q), wi) for q in layout.qubits]
            _, t, _ = oracles.chain_s21_scattering(rs, DEFAULT_MEDIUM.phase(wi, 400e-6))
            assert abs(gi - complex(t)) < 1e-9

    def test_reciprocity(self):
        qubits = load_parameter_set("individual").qubits()
        layout = ChainLayout(tuple(q for q in qubits if q.gamma20 is not None))
        drive = ControlDrive(layout.qubits[0].omega21, mhz(30))
        w = ghz(7.812) + mhz(np.linspace(-60, 60, 121))
        a = chain_s21(layout, drive, w).values
        b = chain_s21(layout.reversed(), drive, w).values
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_lossless_unitarity(self, qubit):
        lossless = qubit.lossless()
        layout = seven(lossless)
        w = qubit.omega10 + mhz(np.linspace(-100, 100, 400)) + 1234.5
        drive = ControlDrive.off(lossless)
        s21 = chain_s21(layout, drive, w).values
        s11 = chain_s11(layout, drive, w).values
        np.testing.assert_allclose(np.abs(s21) ** 2 + np.abs(s11) ** 2, 1.0, atol=1e-9)

    def test_composition(self, qubit, drive40):
        w = qubit.omega10 + mhz(np.linspace(-50, 50, 101))
        m6 = chain_tmatrix(ChainLayout.uniform(qubit, 6), drive40, w)
        extra = qubit_tmatrix(reflection(qubit, drive40, w)) @ phase_tmatrix(
            DEFAULT_MEDIUM.phase(w, 400e-6))
        np.testing.assert_allclose(transmission_of(extra @ m6),
                                   chain_s21(seven(qubit), drive40, w).values, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(G=st.floats(0.5, 30.0), nr=st.floats(0.01, 10.0), g20=st.floats(0.1, 20.0),
           rabi=st.floats(0.0, 120.0), N=st.integers(1, 9))
    def test_energy_bound(self, G, nr, g20, rabi, N):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConsistencyWarning)
            q = TransmonQubit(ghz(7.8), mhz(280), mhz(G), mhz(nr), mhz(g20))
        w = q.omega10 + mhz(np.linspace(-150, 150, 301))
        s = chain_s21(ChainLayout.uniform(q, N), ControlDrive.resonant(q, mhz(rabi)), w)
        assert np.all(np.abs(s.values) <= 1 + 1e-12)

    def test_singular_qubit_reports_index(self, qubit):
        bystander = qubit.with_(omega10=ghz(7.95))
        mirror = qubit.lossless()
        layout = ChainLayout((bystander, bystander, mirror))
        with pytest.raises(SingularScattererError) as info:
            chain_s21(layout, ControlDrive.off(mirror), np.array([qubit.omega10]))
        assert info.value.qubit_index == 2
        assert info.value.omega == qubit.omega10

    def test_line_reference(self, qubit, drive40):
        w = qubit.omega10 + mhz(np.linspace(-10, 10, 5))
        raw = chain_s21(seven(qubit), drive40, w)
        ref = chain_s21(seven(qubit), drive40, w, reference="line")
        np.testing.assert_allclose(raw.values, ref.values * line_s21(seven(qubit), w).values,
                                   rtol=1e-14)
        with pytest.raises(InvalidParameterError):
            chain_s21(seven(qubit), drive40, w, reference="vacuum")


class TestBackground:
    grid = ghz(7.8) + mhz(np.linspace(-150, 150, 3001))

    def test_identity_background(self, qubit, drive40):
        s = chain_s21(seven(qubit), drive40, self.grid)
        out = apply_background(s, BackgroundModel())
        np.testing.assert_array_equal(out.values, s.values)

    def test_flat_scale(self, qubit, drive40):
        s = chain_s21(seven(qubit), drive40, self.grid)
        raw = apply_background(s, BackgroundModel(scale=2.0))
        halved = normalize(raw, unity_spectrum(self.grid), a=2.0)
        np.testing.assert_allclose(halved.values, s.values, rtol=1e-15)
        np.testing.assert_allclose(normalize(s, unity_spectrum(self.grid), a=2.0).values,
                                   s.values / 2, rtol=1e-15)

    def test_round_trip_with_ripple(self, qubit, drive40):
        bg = BackgroundModel(scale=0.7, reflectors=((0.1, 0.0), (0.1, 1.2566)))
        s = chain_s21(seven(qubit), drive40, self.grid)
        back = normalize(apply_background(s, bg),
                         apply_background(unity_spectrum(self.grid), bg), a=1.0)
        np.testing.assert_allclose(back.values, s.values, atol=1e-12)

    def test_ripple_amplitude_and_period(self):
        v = DEFAULT_MEDIUM.phase_velocity
        length = v / (2 * 50e6)  # 50 MHz free spectral range
        bg = BackgroundModel(reflectors=((0.1, 0.0), (0.1, length)))
        mag = np.abs(bg.s21(self.grid))
        hi, lo = oracles.airy_extrema(0.1, 0.1)
        assert mag.max() == pytest.approx(hi, rel=1e-6)
        assert mag.min() == pytest.approx(lo, rel=1e-6)
        peaks = np.nonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] > mag[2:]))[0] + 1
        fsr = np.diff(self.grid[peaks]).mean() / TWO_PI
        assert fsr == pytest.approx(50e6, rel=1e-3)

    def test_errors(self):
        s = unity_spectrum(self.grid)
        with pytest.raises(ShapeError):
            normalize(s, unity_spectrum(self.grid[:-1]))
        zero = ComplexSpectrum(self.grid, np.zeros(self.grid.size))
        with pytest.raises(DivisionGuardError):
            normalize(s, zero)
        with pytest.raises(InvalidParameterError):
            BackgroundModel(scale=0.0)
        with pytest.raises(InvalidParameterError):
            BackgroundModel(reflectors=((1.0, 0.0), (0.1, 1.0)))


class TestSpectrum:
    def test_csv_round_trip(self, qubit, drive40, tmp_path):
        s = chain_s21(seven(qubit), drive40, qubit.omega10 + mhz(np.linspace(-5, 5, 11)))
        path = tmp_path / "s.csv"
        text = s.to_csv(path)
        assert text.splitlines()[0] == "frequency_Hz,re_S21,im_S21,abs_S21,arg_S21_rad"
        back = ComplexSpectrum.from_csv(path)
        np.testing.assert_allclose(back.omega, s.omega, rtol=1e-15)
        np.testing.assert_array_equal(back.values, s.values)

    def test_invariants(self):
        with pytest.raises(ShapeError):
            ComplexSpectrum([1.0, 2.0], [1.0])
        with pytest.raises(InvalidParameterError):
            ComplexSpectrum([2.0, 1.0], [1.0, 1.0])
        with pytest.raises(InvalidParameterError):
            ComplexSpectrum([1.0, 2.0], [1.0, np.inf])

    def test_product_needs_same_grid(self):
        a = unity_spectrum([1.0, 2.0])
        with pytest.raises(ShapeError):
            a * unity_spectrum([1.0, 3.0])
        assert np.all((a * 2).values == 2)

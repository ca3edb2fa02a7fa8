####################################
##### Arquivo: test_cbf.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Testes unitários para os estimadores por frequência de batimento."""
from dataclasses import replace

import numpy as np
import pytest

from src.core.numerics import centered_modulo
from src.estimators.cbf import (
    cbf_to_params_complex,
    cbf_to_params_real,
    estimate_cbf,
    lorentzian_fit,
    max_periodogram,
    tsuchida_estimate,
)
from src.models.config import AcquisitionConfig, Target
from src.models.errors import DegenerateInputError, InvalidArgumentError, UnsupportedModulationError
from src.models.estimate import BeatFrequencies, EstimationMethod
from src.signal.modulation import ModulationWaveform, WaveformKind, if_difference
from src.signal.synthesis import synth_measurement

B = 500e6
T = 2e-6
FS = 200e6


def tone(frequency, n=400, fs=FS):
    """Tom complexo de amplitude unitária."""
    return np.exp(2j * np.pi * frequency * np.arange(n) / fs)


class TestFrequencyEstimators:
    """Casos de teste para o periodograma e o ajuste de Lorentziana."""

    @pytest.mark.parametrize("frequency", [12.3456e6, -37.1e6, 0.0])
    def test_periodogram_off_bin(self, frequency):
        """Testa o máximo refinado fora dos bins da FFT."""
        assert max_periodogram(tone(frequency), FS) == pytest.approx(frequency, abs=10.0)

    def test_periodogram_short_segment(self):
        """Testa a rejeição de segmentos com menos de 4 amostras."""
        with pytest.raises(InvalidArgumentError):
            max_periodogram(np.ones(3), FS)

    def test_periodogram_zero_segment(self):
        """Testa a rejeição de segmento nulo."""
        with pytest.raises(DegenerateInputError):
            max_periodogram(np.zeros(16), FS)

    def test_lorentzian_on_bin(self):
        """Testa o ajuste num tom centrado num bin."""
        assert lorentzian_fit(tone(10e6), FS) == pytest.approx(10e6, abs=0.05 * FS / 400)

    def test_lorentzian_short_segment(self):
        """Testa a rejeição de segmentos com menos de 16 amostras."""
        with pytest.raises(InvalidArgumentError):
            lorentzian_fit(tone(1e6, n=8), FS)


class TestBeatConversion:
    """Casos de teste para a conversão (f_b1, f_b2) → (τ, f)."""

    def test_first_case(self):
        """Testa o caso sem translação."""
        tau, f = cbf_to_params_complex(BeatFrequencies(30e6, -20e6, FS), B, T, FS)
        assert tau == pytest.approx(T / (2 * B) * 50e6)
        assert f == pytest.approx(5e6)

    def test_second_case(self):
        """Testa a translação (f_b1 + f_s, f_b2 − f_s)."""
        tau, f = cbf_to_params_complex(BeatFrequencies(-80e6, 60e6, FS), B, T, FS)
        assert tau == pytest.approx(0.52e-6)
        assert f == pytest.approx(-10e6)

    @pytest.mark.parametrize("tau,doppler", [(0.3e-6, 0.0), (0.6e-6, 10e6), (0.1e-6, -20e6)])
    def test_inverts_wrapped_beats(self, tau, doppler):
        """Testa a inversão dos batimentos enrolados dentro da região não ambígua."""
        f_b1 = centered_modulo(B * tau / T + doppler, FS)
        f_b2 = centered_modulo(-B * tau / T + doppler, FS)
        tau_hat, f_hat = cbf_to_params_complex(BeatFrequencies(f_b1, f_b2, FS), B, T, FS)
        assert tau_hat == pytest.approx(tau, rel=1e-9)
        assert f_hat == pytest.approx(doppler, abs=1e-3)

    def test_beats_out_of_range(self):
        """Testa a rejeição de batimentos fora de (−f_s/2, f_s/2]."""
        with pytest.raises(InvalidArgumentError):
            BeatFrequencies(150e6, 0.0, FS)

    def test_real_conversion(self):
        """Testa a conversão para sinais reais."""
        tau, f = cbf_to_params_real(30e6, 20e6, B, T)
        assert tau == pytest.approx(T / (2 * B) * 50e6)
        assert f == pytest.approx(5e6)

    def test_real_conversion_negative(self):
        """Testa a rejeição de magnitudes negativas."""
        with pytest.raises(InvalidArgumentError):
            cbf_to_params_real(-1.0, 2.0, B, T)


class TestEstimateCbf:
    """Casos de teste para a estimativa CBF completa."""

    @pytest.fixture
    def triangular(self):
        return ModulationWaveform(WaveformKind.TRIANGULAR, B, T)

    @pytest.mark.parametrize("estimator", ["periodogram", "lorentzian"])
    def test_noiseless_short_range(self, triangular, estimator):
        """Testa a recuperação de 15 m sem ruído."""
        m = synth_measurement(triangular, AcquisitionConfig(noiseless=True), Target(15.0), 1)
        estimate = estimate_cbf(m, triangular, estimator)
        assert estimate.d_hat == pytest.approx(15.0, abs=0.02)
        assert estimate.diagnostics["periods"] == 1
        assert estimate.method == EstimationMethod.from_cli(estimator)

    def test_two_periods_averaged(self, triangular):
        """Testa a média sobre dois períodos."""
        m = synth_measurement(triangular, AcquisitionConfig(noiseless=True, num_samples=1600), Target(15.0), 1)
        estimate = estimate_cbf(m, triangular, "periodogram")
        assert estimate.diagnostics["periods"] == 2
        assert estimate.d_hat == pytest.approx(15.0, abs=0.02)

    def test_rejects_sinusoidal(self):
        """Testa a rejeição de modulação senoidal."""
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(15.0), 1)
        with pytest.raises(UnsupportedModulationError):
            estimate_cbf(m, w)

    def test_short_window(self, triangular):
        """Testa a rejeição de janela menor que um período."""
        m = synth_measurement(triangular, AcquisitionConfig(noiseless=True, num_samples=400), Target(15.0), 1)
        with pytest.raises(InvalidArgumentError):
            estimate_cbf(m, triangular)


class TestTsuchida:
    """Casos de teste para o método de Tsuchida."""

    def test_noiseless_sinusoidal(self):
        """Testa a recuperação de 10 m abaixo de Nyquist."""
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(10.0), 1)
        estimate = tsuchida_estimate(m, w)
        assert estimate.d_hat == pytest.approx(10.0, abs=0.05)
        assert estimate.method == EstimationMethod.TSUCHIDA

    def test_invariant_to_constant_phase(self):
        """Testa que uma rotação global de fase de u não altera τ̂ nem f̂."""
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(15.0), 1)
        rotated = replace(m, u=m.u * np.exp(2.5j))
        base = tsuchida_estimate(m, w)
        shifted = tsuchida_estimate(rotated, w)
        assert shifted.tau_hat == pytest.approx(base.tau_hat, rel=1e-9)
        assert shifted.f_hat == pytest.approx(base.f_hat, abs=1e-3)

    def test_fails_above_nyquist(self):
        """Testa o erro grande quando |a(t) − a(t−τ)| ultrapassa f_s/2."""
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        cfg = AcquisitionConfig(noiseless=True)
        below, above = Target(10.0), Target(100.0)
        times = np.arange(cfg.num_samples) / FS
        assert np.max(np.abs(if_difference(w, below.delay_s(), times))) < FS / 2
        assert np.max(np.abs(if_difference(w, above.delay_s(), times))) > FS / 2

        accurate = tsuchida_estimate(synth_measurement(w, cfg, below, 1), w)
        aliased = tsuchida_estimate(synth_measurement(w, cfg, above, 1), w)
        assert accurate.d_hat == pytest.approx(10.0, abs=0.05)
        assert abs(aliased.d_hat - 100.0) > 20.0

    def test_rejects_triangular(self):
        """Testa a rejeição de modulação triangular."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(10.0), 1)
        with pytest.raises(UnsupportedModulationError):
            tsuchida_estimate(m, w)

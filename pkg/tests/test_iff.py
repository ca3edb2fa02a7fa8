####################################
##### Arquivo: test_iff.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Testes unitários para o estimador por frequência instantânea (IFF)."""
from unittest.mock import patch

import numpy as np
import pytest

from src.core.numerics import OptimResult, centered_modulo, maximize_quasi_newton
from src.estimators.calibration import h_fit
from src.estimators.iff import (
    AnnealingSchedule,
    extract_if,
    iff_estimate,
    reduce_parameters,
    wrapped_normal_loglik,
)
from src.estimators.landscape import initial_lattice
from src.models.config import SPEED_OF_LIGHT, AcquisitionConfig, Target
from src.models.errors import (
    CalibrationMissingError,
    DegenerateInputError,
    InvalidArgumentError,
    NumericFailureError,
)
from src.models.estimate import EstimationMethod
from src.signal.modulation import ModulationWaveform, WaveformKind, wrapped_if
from src.signal.synthesis import synth_measurement

B = 500e6
T = 2e-6
FS = 200e6
L = 100e3


class TestExtractIf:
    """Casos de teste para a extração da frequência instantânea."""

    def test_noiseless_matches_wrapped_if(self):
        """Testa ζ = g̃ nos pontos médios sem ruído para modulação triangular."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        target = Target(130.0)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), target, 0)
        z = extract_if(m.u, FS)
        expected = wrapped_if(w, target.delay_s(), 0.0, FS, z.midpoint_times)
        # a FI é linear por partes; longe dos vértices a diferença de fase é exata
        times = z.midpoint_times
        s = np.mod(times, T)
        s_delayed = np.mod(times - target.delay_s(), T)
        smooth = (s > 1 / FS) & (s < T - 1 / FS) & (s_delayed > 1 / FS) & (s_delayed < T - 1 / FS)
        assert np.allclose(centered_modulo(z.zeta[smooth] - expected[smooth], 1.0), 0.0, atol=1e-9)
        assert len(z) == m.num_samples - 1

    def test_zero_sample(self):
        """Testa DegenerateInputError para amostra nula."""
        u = np.ones(10, dtype=complex)
        u[4] = 0
        with pytest.raises(DegenerateInputError) as excinfo:
            extract_if(u, FS)
        assert excinfo.value.index == 4

    def test_too_short(self):
        """Testa a rejeição de menos de 2 amostras."""
        with pytest.raises(InvalidArgumentError):
            extract_if(np.ones(1, dtype=complex), FS)


class TestWrappedNormalLoglik:
    """Casos de teste para a verossimilhança da normal enrolada."""

    @pytest.fixture
    def problem(self):
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        m = synth_measurement(w, AcquisitionConfig(), Target(100.0, 2.0), 17)
        return w, extract_if(m.u, FS)

    def test_gradient_matches_finite_differences(self, problem):
        """Testa o gradiente analítico em coordenadas normalizadas (τf_s, f/f_s)."""
        w, z = problem
        rng = np.random.default_rng(4)
        sigma2 = 0.01
        for _ in range(10):
            x_tau = rng.uniform(0.05, 0.95) * 2 * T * FS
            x_f = rng.uniform(-0.25, 0.25)
            _, gradient = wrapped_normal_loglik(z, w, x_tau / FS, x_f * FS, sigma2, 2)
            analytic = np.array([gradient[0] / FS, gradient[1] * FS])

            h_tau, h_f = 1e-4, 1e-6
            plus = wrapped_normal_loglik(z, w, (x_tau + h_tau) / FS, x_f * FS, sigma2, 2)[0]
            minus = wrapped_normal_loglik(z, w, (x_tau - h_tau) / FS, x_f * FS, sigma2, 2)[0]
            numeric_tau = (plus - minus) / (2 * h_tau)
            plus = wrapped_normal_loglik(z, w, x_tau / FS, (x_f + h_f) * FS, sigma2, 2)[0]
            minus = wrapped_normal_loglik(z, w, x_tau / FS, (x_f - h_f) * FS, sigma2, 2)[0]
            numeric_f = (plus - minus) / (2 * h_f)

            numeric = np.array([numeric_tau, numeric_f])
            assert np.all(np.abs(analytic - numeric) <= 1e-5 * np.maximum(np.abs(analytic), 1.0))

    def test_maximum_near_truth(self, problem):
        """Testa se o parâmetro verdadeiro supera um parâmetro distante."""
        w, z = problem
        target = Target(100.0, 2.0)
        truth = wrapped_normal_loglik(z, w, target.delay_s(), target.doppler_hz(w.center_frequency_hz), 1e-3, 2)[0]
        far = wrapped_normal_loglik(z, w, 1.5e-6, 0.0, 1e-3, 2)[0]
        assert truth > far

    def test_invalid_variance(self, problem):
        """Testa a rejeição de σ² não positiva."""
        w, z = problem
        with pytest.raises(InvalidArgumentError):
            wrapped_normal_loglik(z, w, 1e-6, 0.0, 0.0, 2)


    def test_more_wraps_never_lower(self, problem):
        """Testa que aumentar K nunca reduz L (a soma só ganha termos positivos)."""
        w, z = problem
        rng = np.random.default_rng(8)
        for _ in range(20):
            tau = rng.uniform(0.0, 2 * T)
            f = rng.uniform(-0.5, 0.5) * FS
            sigma2 = float(rng.choice([1e-3, 1e-2, 1e-1]))
            values = [wrapped_normal_loglik(z, w, tau, f, sigma2, K)[0] for K in (1, 2, 3, 5)]
            for lower, higher in zip(values, values[1:]):
                assert higher >= lower - 1e-9 * abs(lower)

    def test_doppler_period(self, problem):
        """Testa L(τ, f + f_s) = L(τ, f) e o mesmo gradiente."""
        w, z = problem
        for tau, f in [(3e-7, 1e6), (1.1e-6, -4.5e7), (3.9e-6, 9.9e7)]:
            base, base_gradient = wrapped_normal_loglik(z, w, tau, f, 1e-2, 2)
            shifted, shifted_gradient = wrapped_normal_loglik(z, w, tau, f + FS, 1e-2, 2)
            assert shifted == pytest.approx(base, rel=1e-9, abs=1e-9)
            assert np.allclose(shifted_gradient, base_gradient, rtol=1e-6, atol=1e-6)


class TestAnnealingSchedule:
    """Casos de teste para o esquema de recozimento."""

    def test_default_stages(self):
        """Testa os três estágios a partir de σ̂² pequena."""
        schedule = AnnealingSchedule.default(1e-4)
        assert schedule.variances == pytest.approx((1e-2, 1e-3, 1e-4))

    def test_large_variance(self):
        """Testa estágios iguais quando σ̂² ≥ 10⁻²."""
        assert AnnealingSchedule.default(0.05).variances == pytest.approx((0.05, 0.05, 0.05))

    def test_invalid(self):
        """Testa a rejeição de variâncias não positivas."""
        with pytest.raises(InvalidArgumentError):
            AnnealingSchedule((1e-2, 0.0))


class TestReduceParameters:
    """Casos de teste para a redução ao domínio fundamental."""

    @pytest.mark.parametrize("tau,expected", [(0.0, 2 * T), (2 * T, 2 * T), (2 * T + 1e-7, 1e-7), (-1e-7, 2 * T - 1e-7)])
    def test_delay(self, tau, expected):
        """Testa τ em (0, 2T]."""
        assert reduce_parameters(tau, 0.0, 2 * T, FS)[0] == pytest.approx(expected)

    def test_doppler(self):
        """Testa f em (−f_s/2, f_s/2]."""
        assert reduce_parameters(1e-7, 0.75 * FS, 2 * T, FS)[1] == pytest.approx(-0.25 * FS)


class TestIffEstimate:
    """Casos de teste para a estimativa IFF completa."""

    def test_noiseless_distance_only(self):
        """Testa 130 m sem ruído, além da região não ambígua do CBF."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(130.0), 0)
        estimate = iff_estimate(m, w, L, estimate_velocity=False)
        assert estimate.method == EstimationMethod.IFF
        assert estimate.d_hat == pytest.approx(130.0, abs=0.01)
        assert estimate.f_hat == 0.0
        assert estimate.diagnostics["starts"] == 6

    def test_noiseless_joint(self):
        """Testa a estimativa conjunta sem ruído com modulação senoidal."""
        w = ModulationWaveform(WaveformKind.SINUSOIDAL, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(300.0, 3.0), 0)
        estimate = iff_estimate(m, w, L, estimate_velocity=True)
        assert estimate.d_hat == pytest.approx(300.0, abs=0.01)
        assert estimate.v_hat == pytest.approx(3.0, abs=0.05)

    def test_noisy_with_table(self):
        """Testa 130 m com ruído usando a tabela ĥ."""
        table = h_fit(np.arange(-30.0, 45.0, 5.0), samples_per_point=2000, seed=1)
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(), Target(130.0), 5)
        estimate = iff_estimate(m, w, L, h_table=table, estimate_velocity=False)
        assert abs(estimate.d_hat - 130.0) < 0.15
        assert np.isfinite(estimate.diagnostics["snr_eta_hat"])

    def test_noisy_without_table(self):
        """Testa CalibrationMissingError com SNR finita e sem tabela."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(), Target(130.0), 5)
        with pytest.raises(CalibrationMissingError):
            iff_estimate(m, w, L, estimate_velocity=False)

    def test_noiseless_smooth_stair(self):
        """Testa a recuperação sem ruído com a modulação em escada suave."""
        w = ModulationWaveform(WaveformKind.SMOOTH_STAIR, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(250.0), 0)
        estimate = iff_estimate(m, w, L, estimate_velocity=False)
        assert estimate.d_hat == pytest.approx(250.0, abs=0.01)

    def test_line_search_failure_is_reported(self):
        """Testa converged=False quando o BFGS para antes do máximo de iterações sem convergir."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(130.0), 0)

        def stalled(*args, **kwargs):
            result = maximize_quasi_newton(*args, **kwargs)
            return OptimResult(result.point, result.value, 3, False)

        with patch('src.estimators.iff.maximize_quasi_newton', side_effect=stalled):
            estimate = iff_estimate(m, w, L, estimate_velocity=False)
        assert estimate.converged is False
        assert estimate.d_hat == pytest.approx(130.0, abs=0.01)

    def test_all_starts_fail(self):
        """Testa o melhor ponto do reticulado com converged=False quando todos os inícios falham."""
        w = ModulationWaveform(WaveformKind.TRIANGULAR, B, T)
        m = synth_measurement(w, AcquisitionConfig(noiseless=True), Target(130.0), 0)
        failure = NumericFailureError("Objetivo não finito", last_point=[0.0])
        with patch('src.estimators.iff.maximize_quasi_newton', side_effect=failure):
            estimate = iff_estimate(m, w, L, estimate_velocity=False)
        assert estimate.converged is False
        starts = [tau for tau, _ in initial_lattice(w, FS, 0.9, estimate_velocity=False)]
        assert any(estimate.tau_hat == pytest.approx(tau, rel=1e-12) for tau in starts)

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", [WaveformKind.TRIANGULAR, WaveformKind.SINUSOIDAL, WaveformKind.SMOOTH_STAIR])
    def test_global_optimum_from_random_parameters(self, kind):
        """Testa a recuperação sem ruído de (τ, f) sorteados em todo o domínio fundamental."""
        w = ModulationWaveform(kind, B, T)
        cfg = AcquisitionConfig(noiseless=True)
        rng = np.random.default_rng(21)
        v_max = 0.45 * FS * SPEED_OF_LIGHT / (2 * w.center_frequency_hz)
        misses = []
        for trial in range(40):
            target = Target(float(rng.uniform(10.0, 590.0)), float(rng.uniform(-v_max, v_max)))
            m = synth_measurement(w, cfg, target, trial)
            estimate = iff_estimate(m, w, L, estimate_velocity=True)
            if abs(estimate.d_hat - target.d_m) > 0.05 or abs(estimate.v_hat - target.v_mps) > 0.5:
                misses.append((target.d_m, target.v_mps, estimate.d_hat, estimate.v_hat))
        assert misses == []

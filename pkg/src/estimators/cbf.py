####################################
##### Arquivo: cbf.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Estimadores convencionais por frequência de batimento constante (CBF).

Este módulo implementa a maximização do periodograma com refinamento de
Brent, o ajuste de Lorentziana, os mapeamentos CBF → (τ, f) para sinais
complexos (regra dos quatro casos) e reais, o estimador de modulação
triangular por segmentos e o método de Tsuchida para modulação senoidal.
"""
import logging
from typing import Tuple

import numpy as np
from scipy import fft as sp_fft

from ..core.numerics import centered_modulo, maximize_quasi_newton, maximize_scalar_bounded
from ..models.errors import (
    DegenerateInputError,
    FmcwError,
    InvalidArgumentError,
    UnsupportedModulationError,
)
from ..models.estimate import BeatFrequencies, Estimate, EstimationMethod
from ..models.measurement import Measurement
from ..signal.modulation import ModulationWaveform, WaveformKind
from .iff import extract_if

logger = logging.getLogger(__name__)

LORENTZIAN_HALF_WINDOW = 10
LORENTZIAN_FLOOR = 1e-12


def _dtft_power(segment: np.ndarray, fs: float, frequency: float) -> float:
    n = np.arange(segment.size)
    return float(np.abs(np.sum(segment * np.exp(-2j * np.pi * frequency * n / fs))) ** 2)


def _peak_search(segment, fs: float) -> Tuple[float, float]:
    """Frequência e potência do máximo refinado do periodograma."""
    x = np.asarray(segment, dtype=complex)
    if x.size < 4:
        raise InvalidArgumentError(f"Segmento precisa de ao menos 4 amostras, recebido {x.size}")
    if not np.any(np.abs(x) > 0):
        raise DegenerateInputError("Segmento identicamente nulo")
    power = np.abs(sp_fft.fft(x)) ** 2
    k = int(np.argmax(power))
    bin_width = fs / x.size
    coarse = float(sp_fft.fftfreq(x.size, d=1.0 / fs)[k])
    result = maximize_scalar_bounded(
        lambda f: _dtft_power(x, fs, f),
        coarse - bin_width,
        coarse + bin_width,
        coarse,
        tol=1e-9 * fs,
    )
    return centered_modulo(result.scalar, fs), result.value


def max_periodogram(segment, fs: float) -> float:
    """Estimativa de frequência pelo máximo do periodograma.

    Args:
        segment: Amostras complexas do segmento
        fs: Taxa de amostragem (Hz)

    Returns:
        float: Frequência em (−f_s/2, f_s/2]
    """
    frequency, _ = _peak_search(segment, fs)
    return frequency


def _lorentzian_residuals(theta, offsets, log_power):
    center, log_width, log_amplitude = theta
    width = np.exp(log_width)
    z = (offsets - center) / width
    denominator = 1.0 + z * z
    residual = log_power - (log_amplitude - np.log(denominator))
    jacobian = np.stack([2.0 * z / (width * denominator), 2.0 * z * z / denominator, np.ones_like(z)])
    return residual, jacobian


def _lorentzian_center(segment, fs: float) -> Tuple[float, bool]:
    """Centro da Lorentziana ajustada; devolve também se houve recuo ao periodograma."""
    x = np.asarray(segment, dtype=complex)
    if x.size < 16:
        raise InvalidArgumentError(f"Ajuste de Lorentziana precisa de ao menos 16 amostras, recebido {x.size}")
    peak = max_periodogram(x, fs)
    n = x.size
    power = np.abs(sp_fft.fft(x)) ** 2
    position = peak * n / fs
    k0 = int(np.round(position))
    offsets = np.arange(-LORENTZIAN_HALF_WINDOW, LORENTZIAN_HALF_WINDOW + 1, dtype=float)
    window = power[(k0 + offsets.astype(int)) % n]
    log_power = np.log(np.maximum(window, LORENTZIAN_FLOOR * window.max()))

    def objective(theta):
        residual, jacobian = _lorentzian_residuals(theta, offsets, log_power)
        return -float(residual @ residual), 2.0 * (jacobian @ residual)

    start = np.array([position - k0, 0.0, float(log_power.max())])
    try:
        result = maximize_quasi_newton(objective, True, start, tol=1e-10, max_iter=200)
    except FmcwError as e:
        logger.warning(f"Ajuste de Lorentziana falhou ({e}); usando o máximo do periodograma")
        return peak, True
    center = float(result.point[0])
    if not np.isfinite(center) or abs(center) > LORENTZIAN_HALF_WINDOW:
        logger.warning(f"Ajuste de Lorentziana divergiu (centro={center}); usando o máximo do periodograma")
        return peak, True
    return centered_modulo((k0 + center) * fs / n, fs), False


def lorentzian_fit(segment, fs: float) -> float:
    """Frequência central de uma Lorentziana ajustada ao periodograma.

    O ajuste usa a potência em escala logarítmica em ±10 bins ao redor do
    máximo, com parâmetros (centro, log largura, log amplitude).

    Args:
        segment: Amostras complexas do segmento (≥ 16)
        fs: Taxa de amostragem (Hz)

    Returns:
        float: Frequência em (−f_s/2, f_s/2]
    """
    frequency, _ = _lorentzian_center(segment, fs)
    return frequency


def cbf_to_params_complex(bf: BeatFrequencies, bandwidth: float, chirp_duration: float, fs: float):
    """Converte frequências de batimento complexas em (τ, f).

    As frequências são primeiro transladas no toro pela regra dos quatro
    casos (primeiro caso satisfeito, na ordem listada) e depois
    multiplicadas pela matriz [[T/2B, −T/2B], [1/2, 1/2]].

    Returns:
        Tuple[float, float]: Atraso τ (s) e Doppler f (Hz)
    """
    f1, f2 = bf.f_b1, bf.f_b2
    total = f1 + f2
    half = 0.5 * fs
    if f1 > f2 and -half <= total <= half:
        pass
    elif f1 <= f2 and -half <= total <= half:
        f1, f2 = f1 + fs, f2 - fs
    elif total > half:
        f2 = f2 - fs
    else:
        f1 = f1 + fs
    tau = 0.5 * chirp_duration / bandwidth * (f1 - f2)
    return tau, 0.5 * (f1 + f2)


def cbf_to_params_real(f_b1: float, f_b2: float, bandwidth: float, chirp_duration: float):
    """Converte magnitudes de batimento de sinais reais em (τ, f)."""
    if f_b1 < 0 or f_b2 < 0:
        raise InvalidArgumentError(f"Batimentos reais devem ser não negativos ({f_b1}, {f_b2})")
    return 0.5 * chirp_duration / bandwidth * (f_b1 + f_b2), 0.5 * (f_b1 - f_b2)


def _segment_bounds(fs: float, chirp_duration: float, index: int) -> int:
    return int(np.ceil(index * chirp_duration * fs - 1e-6))


def estimate_cbf(m: Measurement, w: ModulationWaveform, frequency_estimator: str = "lorentzian") -> Estimate:
    """Estimativa CBF para modulação triangular.

    f_b1 é estimada nas amostras de [0, T) e f_b2 em [T, 2T) de cada
    período; os pares (τ, f) de cada período são promediados.

    Raises:
        UnsupportedModulationError: Para modulações não triangulares
    """
    method = EstimationMethod.LORENTZIAN if frequency_estimator == "lorentzian" else EstimationMethod.PERIODOGRAM
    if w.kind != WaveformKind.TRIANGULAR:
        raise UnsupportedModulationError(method.cli_name, w.kind.name.lower())
    fs = m.fs_hz
    T = w.chirp_duration_s
    periods = int(np.floor(m.num_samples / (2.0 * T * fs) + 1e-9))
    if periods == 0:
        raise InvalidArgumentError("Observação precisa cobrir ao menos um período 2T completo")

    taus, dopplers, powers, fallbacks = [], [], [], 0
    for p in range(periods):
        start = _segment_bounds(fs, T, 2 * p)
        middle = _segment_bounds(fs, T, 2 * p + 1)
        stop = _segment_bounds(fs, T, 2 * p + 2)
        beats = []
        for segment in (m.u[start:middle], m.u[middle:stop]):
            if method == EstimationMethod.LORENTZIAN:
                frequency, fallback = _lorentzian_center(segment, fs)
                fallbacks += int(fallback)
                beats.append(frequency)
            else:
                frequency, power = _peak_search(segment, fs)
                powers.append(power)
                beats.append(frequency)
        tau, doppler = cbf_to_params_complex(BeatFrequencies(beats[0], beats[1], fs), w.bandwidth_hz, T, fs)
        taus.append(tau)
        dopplers.append(doppler)

    diagnostics = {"periods": periods}
    if method == EstimationMethod.LORENTZIAN:
        diagnostics["fallback"] = fallbacks > 0
    return Estimate(
        tau_hat=float(np.mean(taus)),
        f_hat=float(np.mean(dopplers)),
        method=method,
        center_frequency_hz=w.center_frequency_hz,
        objective_value=float(np.mean(powers)) if powers else float("nan"),
        diagnostics=diagnostics,
    )


def tsuchida_estimate(m: Measurement, w: ModulationWaveform) -> Estimate:
    """Método de Tsuchida para modulação senoidal.

    f̂ é a média da frequência instantânea; τ̂ é a média de |ψ|, com ψ a
    fase desenrolada sem o termo 2πf̂t e sem a sua média, normalizada por
    (π/T)∫|a − f_c|. A média removida é a fase constante de ψ
    (2πf_cτ mais a fase inicial); a parte oscilante de φ0(t) − φ0(t−τ) tem
    média nula em períodos inteiros.
    Falha (com erro grande) quando a frequência instantânea ultrapassa a
    frequência de Nyquist.

    Raises:
        UnsupportedModulationError: Para modulações não senoidais
    """
    if w.kind != WaveformKind.SINUSOIDAL:
        raise UnsupportedModulationError(EstimationMethod.TSUCHIDA.cli_name, w.kind.name.lower())
    fs = m.fs_hz
    sequence = extract_if(m.u, fs)
    doppler = float(np.mean(sequence.zeta)) * fs
    psi = np.unwrap(np.angle(m.u)) - 2.0 * np.pi * doppler * m.sample_times
    psi -= psi.mean()
    normalizer = (np.pi / w.chirp_duration_s) * w.abs_deviation_integral()
    return Estimate(
        tau_hat=float(np.mean(np.abs(psi)) / normalizer),
        f_hat=doppler,
        method=EstimationMethod.TSUCHIDA,
        center_frequency_hz=w.center_frequency_hz,
    )

####################################
##### Arquivo: synthesis.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Síntese de medições FMCW com ruído de fase do laser e ruído shot.

Este módulo implementa a equação do lidar, a relação sinal-ruído SNR_η, o
processo de Wiener do ruído de fase e a geração do sinal complexo I/Q u(t)
junto com o canal auxiliar de soma v(t). Toda a aleatoriedade deriva de
uma semente explícita.
"""
import logging
import math
from typing import Optional

import numpy as np

from ..models.config import (
    AcquisitionConfig,
    ExperimentConfig,
    Target,
    WaveformSettings,
)
from ..models.errors import InvalidArgumentError
from ..models.measurement import Measurement
from .modulation import ModulationWaveform, interference_phase

logger = logging.getLogger(__name__)

# Canais independentes derivados da semente de cada medição
_PHASE_CHANNEL, _SHOT_CHANNEL, _AUX_CHANNEL = range(3)


def received_power(cfg: AcquisitionConfig, d: float) -> float:
    """Potência recebida pela equação do lidar de ida e volta.

    Absorção atmosférica nula e alvo frontal (cos φ_inc = 1).

    Args:
        cfg: Configuração de aquisição
        d: Distância do alvo (m)

    Returns:
        float: Potência recebida P_RX (W)
    """
    if not d > 0:
        raise InvalidArgumentError(f"Distância deve ser positiva: {d}")
    return (
        cfg.tx_power_w
        * cfg.responsivity_a_per_w
        * cfg.aperture_m2
        * cfg.reflectivity
        / (math.pi * d * d)
    )


def signal_amplitudes(cfg: AcquisitionConfig, d: float):
    """Amplitudes A₁ = 2R√(P_LO P_RX) e A₂ = R(P_LO + P_RX)."""
    p_rx = received_power(cfg, d)
    r_pd = cfg.responsivity_a_per_w
    return 2.0 * r_pd * math.sqrt(cfg.lo_power_w * p_rx), r_pd * (cfg.lo_power_w + p_rx)


def snr_eta(cfg: AcquisitionConfig, d: float) -> float:
    """SNR em amplitude 2 R P_LO P_RX / (q (P_LO + P_RX)).

    Returns:
        float: SNR_η linear (infinito para configurações sem ruído)
    """
    if cfg.noiseless:
        return math.inf
    p_rx = received_power(cfg, d)
    denominator = cfg.electron_charge * (cfg.lo_power_w + p_rx)
    if denominator == 0:
        return math.inf
    return 2.0 * cfg.responsivity_a_per_w * cfg.lo_power_w * p_rx / denominator


def trial_seed(master_seed: int, point: int, trial: int) -> int:
    """Deriva a semente de 63 bits do ensaio `trial` no ponto `point`.

    O hash do `SeedSequence` é o mesmo para todos os métodos, de modo que
    os estimadores comparados num mesmo ensaio recebem a mesma medição.
    """
    state = np.random.SeedSequence([int(master_seed), int(point), int(trial)]).generate_state(
        1, np.uint64
    )
    return int(state[0] & np.uint64((1 << 63) - 1))


def _wiener_difference(linewidth: float, tau: float, times: np.ndarray, rng) -> np.ndarray:
    """ξ(t) = ω(t) − ω(t−τ) com ω simulado na união das duas grades."""
    n = times.size
    if linewidth == 0 or tau == 0:
        return np.zeros(n)
    merged, inverse = np.unique(np.concatenate([times, times - tau]), return_inverse=True)
    steps = rng.standard_normal(merged.size - 1) * np.sqrt(2.0 * np.pi * linewidth * np.diff(merged))
    omega = np.concatenate([[0.0], np.cumsum(steps)])
    return omega[inverse[:n]] - omega[inverse[n:]]


def simulate_phase_noise(linewidth: float, tau: float, fs: float, n: int, seed) -> np.ndarray:
    """Simula o ruído de fase diferencial ξ_n de um laser com largura de linha L.

    Args:
        linewidth: Largura de linha L (Hz)
        tau: Atraso τ (s)
        fs: Taxa de amostragem (Hz)
        n: Número de amostras
        seed: Semente inteira ou `np.random.Generator`

    Returns:
        np.ndarray: ξ em radianos, variância 2πLτ
    """
    if linewidth < 0 or tau < 0:
        raise InvalidArgumentError(f"L e τ não podem ser negativos (L={linewidth}, τ={tau})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _wiener_difference(linewidth, tau, np.arange(n) / fs, rng)


def _echo_config(w: ModulationWaveform, cfg: AcquisitionConfig, target: Target, seed: int) -> ExperimentConfig:
    kind = w.kind.name.lower()
    return ExperimentConfig(
        waveform=WaveformSettings(
            kind=kind,
            bandwidth_hz=w.bandwidth_hz,
            chirp_duration_s=w.chirp_duration_s,
            center_frequency_hz=w.center_frequency_hz,
            table_path="<memória>" if kind == "tabulated" else None,
        ),
        acquisition=cfg,
        target=target,
        seed=seed,
    )


def synth_measurement(
    w: ModulationWaveform,
    cfg: AcquisitionConfig,
    target: Target,
    seed: int,
    echo: Optional[ExperimentConfig] = None,
) -> Measurement:
    """Sintetiza uma medição I/Q e o canal auxiliar de soma.

    Args:
        w: Forma de onda transmitida
        cfg: Configuração de aquisição
        target: Alvo (distância e velocidade)
        seed: Semente da medição
        echo: Configuração a registrar na medição (gerada a partir dos
            argumentos quando omitida)

    Returns:
        Measurement: u(t_n) = A₁e^{j[φ+ξ]} + η e v(t_n) = A₂ + η′
    """
    if not target.d_m > 0:
        raise InvalidArgumentError(f"Distância do alvo deve ser positiva: {target.d_m}")
    n = cfg.num_samples
    times = np.arange(n) / cfg.fs_hz
    tau = target.delay_s()
    doppler = target.doppler_hz(w.center_frequency_hz)
    a1, a2 = signal_amplitudes(cfg, target.d_m)

    phase_seq, shot_seq, aux_seq = np.random.SeedSequence(int(seed)).spawn(3)
    phase = interference_phase(w, tau, doppler, times)
    if cfg.noiseless:
        u = a1 * np.exp(1j * phase)
        v_aux = np.full(n, a2, dtype=complex)
    else:
        xi = _wiener_difference(cfg.linewidth_hz, tau, times, np.random.default_rng(phase_seq))
        shot_std = math.sqrt(cfg.electron_charge * a2)
        shot = np.random.default_rng(shot_seq).standard_normal((2, n)) * shot_std
        aux = np.random.default_rng(aux_seq).standard_normal((2, n)) * shot_std
        u = a1 * np.exp(1j * (phase + xi)) + (shot[0] + 1j * shot[1])
        v_aux = a2 + (aux[0] + 1j * aux[1])

    logger.debug(
        f"Medição sintetizada: d={target.d_m} m, v={target.v_mps} m/s, N={n}, semente={seed}"
    )
    return Measurement(
        u=u,
        v_aux=v_aux,
        config=echo if echo is not None else _echo_config(w, cfg, target, int(seed)),
        seed=int(seed),
    )

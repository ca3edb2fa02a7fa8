####################################
##### Arquivo: landscape.py
##### Trabalho: Lidar FMCW além de Nyquist
####################################

"""Geometria do objetivo do IFF: distância determinística e reticulado inicial.

A distância D entre duas frequências instantâneas enroladas descreve o
relevo do L_IFF sem ruído. As bacias ao redor de cada ótimo têm forma de
losango com largura Δτ e altura Δf; o reticulado de pontos iniciais é
espaçado por γΔτ para que toda bacia contenha ao menos um ponto.
"""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from ..core.numerics import centered_modulo
from ..models.errors import InvalidArgumentError, ResolutionError
from ..signal.modulation import ModulationWaveform, WaveformKind, if_difference, wrapped_if

logger = logging.getLogger(__name__)

DEFAULT_SCAN_STEPS = 2000


def midpoint_times(sample_times) -> np.ndarray:
    t = np.asarray(sample_times, dtype=float)
    return 0.5 * (t[1:] + t[:-1])


def deterministic_distance(
    w: ModulationWaveform, tau1: float, f1: float, tau2: float, f2: float, fs: float, sample_times
) -> float:
    """D = Σ_n Ω₁(g̃^w_{τ1,f1}(t′_n) − g̃^w_{τ2,f2}(t′_n))².

    Args:
        w: Forma de onda
        tau1, f1: Primeiro par (atraso em s, Doppler em Hz)
        tau2, f2: Segundo par
        fs: Taxa de amostragem (Hz)
        sample_times: Instantes de amostragem t_n; D usa os pontos médios

    Returns:
        float: Distância não negativa, simétrica nos pares
    """
    t = midpoint_times(sample_times)
    first = wrapped_if(w, tau1, f1, fs, t)
    second = wrapped_if(w, tau2, f2, fs, t)
    return float(np.sum(centered_modulo(first - second, 1.0) ** 2))


def rhombus_closed_form(w: ModulationWaveform, fs: float) -> Optional[Tuple[float, float]]:
    """(Δτ, Δf) analíticos para as modulações triangular e senoidal.

    Returns:
        Tupla (Δτ, Δf), ou None para modulações sem forma fechada
    """
    B, T = w.bandwidth_hz, w.chirp_duration_s
    if w.kind == WaveformKind.TRIANGULAR:
        return min(fs * T / B, 2.0 * T), fs
    if w.kind == WaveformKind.SINUSOIDAL:
        ratio = fs / (2.0 * B)
        if ratio >= 1.0:
            return 2.0 * T, fs
        return math.asin(ratio) * 4.0 * T / math.pi, fs
    return None


def _half_width(step: float, excursions: np.ndarray, axis: str) -> float:
    """Primeiro cruzamento de max|Δg̃| com 1/2, interpolado entre passos."""
    above = np.nonzero(excursions >= 0.5)[0]
    if above.size == 0:
        raise ResolutionError(
            f"Varredura em {axis} não atingiu a condição de máximo local; "
            "aumente o alcance ou use a forma fechada"
        )
    index = int(above[0])
    if index == 0:
        raise ResolutionError(
            f"Varredura em {axis} atingiu a condição no primeiro passo; reduza o passo da varredura"
        )
    low, high = excursions[index - 1], excursions[index]
    return step * (index + (0.5 - low) / (high - low))


def rhombus_numeric(
    w: ModulationWaveform, fs: float, sample_times, steps: int = DEFAULT_SCAN_STEPS
) -> Tuple[float, float]:
    """Estima (Δτ, Δf) varrendo a bacia global ao redor de (T, 0).

    Ao longo de cada eixo, procura o menor deslocamento em que a maior
    diferença não enrolada das frequências instantâneas normalizadas chega
    a 1/2 (condição de máximo local de −D) e devolve o dobro.

    Args:
        w: Forma de onda
        fs: Taxa de amostragem (Hz)
        sample_times: Instantes de amostragem usados na varredura
        steps: Número de passos por eixo

    Returns:
        Tuple[float, float]: Largura Δτ (s) e altura Δf (Hz)

    Raises:
        ResolutionError: Se a varredura não delimitar o cruzamento
    """
    if steps < 2:
        raise InvalidArgumentError(f"Número de passos da varredura inválido: {steps}")
    T = w.chirp_duration_s
    t = midpoint_times(sample_times)
    reference = if_difference(w, T, t)

    tau_step = T / steps
    tau_excursions = np.array(
        [np.max(np.abs(if_difference(w, T + k * tau_step, t) - reference)) / fs for k in range(1, steps + 1)]
    )
    f_step = fs / steps
    f_excursions = np.arange(1, steps + 1) * f_step / fs

    delta_tau = 2.0 * _half_width(tau_step, tau_excursions, "τ")
    delta_f = 2.0 * _half_width(f_step, f_excursions, "f")
    logger.debug(f"Losango numérico: Δτ={delta_tau:.4e} s, Δf={delta_f:.4e} Hz")
    return delta_tau, delta_f


def initial_lattice(
    w: ModulationWaveform,
    fs: float,
    gamma: float = 0.9,
    estimate_velocity: bool = True,
) -> List[Tuple[float, float]]:
    """Reticulado de pontos iniciais (τ0, f0) que cobre (0, 2T] × (−f_s/2, f_s/2].

    As colunas têm espaçamento exato γΔτ, começam em γΔτ/2 e são
    ⌈2T/(γΔτ)⌉; atrasos além de 2T voltam a (0, 2T] pela periodicidade.
    Na estimação conjunta, uma segunda linha em f = f_s/2 é deslocada de
    meia célula para cobrir as lacunas entre os losangos.

    Args:
        w: Forma de onda
        fs: Taxa de amostragem (Hz)
        gamma: Fator de espaçamento em (0, 1]
        estimate_velocity: Se False, apenas a linha f = 0

    Returns:
        Lista de pontos iniciais
    """
    if not 0.0 < gamma <= 1.0:
        raise InvalidArgumentError(f"γ deve estar em (0, 1], recebido {gamma}")
    period = w.period
    closed = rhombus_closed_form(w, fs)
    if closed is None:
        samples = int(round(period * fs))
        delta_tau, _ = rhombus_numeric(w, fs, np.arange(samples + 1) / fs)
    else:
        delta_tau, _ = closed
    spacing = gamma * delta_tau
    columns = int(math.ceil(period / spacing - 1e-9))

    def wrap(tau):
        return period - float(np.mod(period - tau, period))

    lattice = [(wrap((i + 0.5) * spacing), 0.0) for i in range(columns)]
    if estimate_velocity:
        lattice += [(wrap((i + 1) * spacing), 0.5 * fs) for i in range(columns)]
    logger.debug(f"Reticulado inicial: {columns} colunas, {len(lattice)} pontos (Δτ={delta_tau:.4e} s)")
    return lattice
